//! PID smoothing of the steering command and mapping of (speed, yaw rate)
//! demands onto differential-drive wheel speeds.

use crate::error::{Error, Result};

/// PID gains and state. The controller consumes an angular error in
/// degrees and emits a yaw-rate demand in radians per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidController {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub integral_limit: f64,
    integral: f64,
    prev_error: f64,
}

impl PidController {
    pub fn new(kp: f64, ki: f64, kd: f64, integral_limit: f64) -> Self {
        PidController {
            kp,
            ki,
            kd,
            integral_limit,
            integral: 0.0,
            prev_error: 0.0,
        }
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// One controller step over `dt` seconds. The accumulated integral is
    /// clamped to `integral_limit` before use.
    pub fn step(&mut self, error: f64, dt: f64) -> Result<f64> {
        if !(dt > 0.0) {
            return Err(Error::InvalidTimeStep(dt));
        }
        self.integral =
            (self.integral + error * dt).clamp(-self.integral_limit, self.integral_limit);
        let derivative = (error - self.prev_error) / dt;
        self.prev_error = error;
        Ok(self.kp * error + self.ki * self.integral + self.kd * derivative)
    }
}

impl Default for PidController {
    /// Gains tuned for this vehicle; the abstract controller structure is
    /// standard.
    fn default() -> Self {
        PidController::new(0.05, 0.0, 0.01, 50.0)
    }
}

/// Left/right wheel linear speeds, meters per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelCommand {
    pub left: f64,
    pub right: f64,
}

/// Maps a forward speed and yaw-rate demand onto wheel speeds:
/// `left = v - omega * wheelbase / 2`, `right = v + omega * wheelbase / 2`.
///
/// When either wheel would exceed `v_max`, both are scaled by the same
/// factor so the larger equals `v_max`; the turning circle is preserved.
pub fn wheel_speeds(v: f64, omega: f64, wheelbase: f64, v_max: f64) -> Result<WheelCommand> {
    if !(wheelbase > 0.0) {
        return Err(Error::InvalidWheelbase(wheelbase));
    }
    let mut left = v - omega * wheelbase / 2.0;
    let mut right = v + omega * wheelbase / 2.0;
    let peak = left.abs().max(right.abs());
    if peak > v_max {
        let scale = v_max / peak;
        left *= scale;
        right *= scale;
    }
    Ok(WheelCommand { left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn proportional_only_step() {
        let mut pid = PidController::new(0.05, 0.0, 0.0, 50.0);
        let out = pid.step(10.0, 1.0 / 30.0).unwrap();
        // derivative term is zero only from rest with kd = 0
        assert!((out - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_error_stays_zero() {
        let mut pid = PidController::default();
        for _ in 0..100 {
            assert_eq!(pid.step(0.0, 0.1).unwrap(), 0.0);
        }
    }

    #[test]
    fn derivative_only_step() {
        let mut pid = PidController::new(0.0, 0.0, 0.01, 50.0);
        assert_eq!(pid.step(0.0, 0.1).unwrap(), 0.0);
        let out = pid.step(1.0, 0.1).unwrap();
        // (1 - 0) / 0.1 * 0.01 = 0.1
        assert!((out - 0.1).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_dt_is_rejected() {
        let mut pid = PidController::default();
        assert!(matches!(pid.step(1.0, 0.0), Err(Error::InvalidTimeStep(_))));
        assert!(matches!(pid.step(1.0, -0.1), Err(Error::InvalidTimeStep(_))));
    }

    #[test]
    fn integral_saturates_under_constant_error() {
        let mut pid = PidController::new(0.0, 1.0, 0.0, 50.0);
        for _ in 0..10_000 {
            pid.step(25.0, 0.1).unwrap();
            assert!(pid.integral().abs() <= 50.0);
        }
        assert_eq!(pid.integral(), 50.0);
    }

    #[test]
    fn straight_drive_maps_symmetrically() {
        let cmd = wheel_speeds(0.22, 0.0, 0.1, 0.5).unwrap();
        assert_eq!(cmd.left, 0.22);
        assert_eq!(cmd.right, 0.22);
    }

    #[test]
    fn pure_rotation() {
        let cmd = wheel_speeds(0.0, 2.0, 0.1, 0.5).unwrap();
        assert!((cmd.left - (-0.1)).abs() < 1e-12);
        assert!((cmd.right - 0.1).abs() < 1e-12);
    }

    #[test]
    fn saturation_preserves_the_wheel_ratio() {
        // v = 0.5, omega = 4, wheelbase = 0.1 -> raw (0.3, 0.7); both
        // scale by 0.5/0.7.
        let cmd = wheel_speeds(0.5, 4.0, 0.1, 0.5).unwrap();
        let scale = 0.5 / 0.7;
        assert!((cmd.left - 0.3 * scale).abs() < 1e-12);
        assert!((cmd.right - 0.7 * scale).abs() < 1e-12);
        assert!((cmd.left / cmd.right - 0.3 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn invalid_wheelbase_is_rejected() {
        assert!(matches!(
            wheel_speeds(0.1, 0.0, 0.0, 0.5),
            Err(Error::InvalidWheelbase(_))
        ));
    }

    proptest! {
        #[test]
        fn pid_is_linear_from_zero_state(errors in proptest::collection::vec(-10.0f64..10.0, 1..30)) {
            // Doubling the whole error sequence doubles the output
            // sequence, provided the integral never clamps.
            let mut a = PidController::new(0.05, 0.02, 0.01, 1e12);
            let mut b = PidController::new(0.05, 0.02, 0.01, 1e12);
            for &e in &errors {
                let ya = a.step(e, 1.0 / 30.0).unwrap();
                let yb = b.step(2.0 * e, 1.0 / 30.0).unwrap();
                prop_assert!((yb - 2.0 * ya).abs() < 1e-9);
            }
        }

        #[test]
        fn wheel_mapping_inverts_cleanly(v in -0.4f64..0.4, omega in -3.0f64..3.0) {
            let cmd = wheel_speeds(v, omega, 0.1, 1e9).unwrap();
            // Without clamping: average recovers v, difference recovers omega.
            prop_assert!(((cmd.left + cmd.right) / 2.0 - v).abs() < 1e-12);
            prop_assert!(((cmd.right - cmd.left) / 0.1 - omega).abs() < 1e-9);
        }

        #[test]
        fn clamped_wheels_stay_bounded(v in -2.0f64..2.0, omega in -20.0f64..20.0) {
            let cmd = wheel_speeds(v, omega, 0.1, 0.5).unwrap();
            prop_assert!(cmd.left.abs() <= 0.5 + 1e-12);
            prop_assert!(cmd.right.abs() <= 0.5 + 1e-12);
        }
    }
}
