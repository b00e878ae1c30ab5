//! Differential-drive kinematics with exact arc integration.

use crate::actuation::WheelCommand;
use crate::error::{Error, Result};
use crate::sim::track::normalize_angle;

/// Vehicle pose in the world frame: position in meters, heading in
/// radians counterclockwise from +x, normalized to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }
}

/// Advances the pose by `dt` seconds of constant wheel speeds.
///
/// Linear speed is the wheel average, yaw rate the wheel difference over
/// the wheelbase. For non-zero yaw rate the pose rotates about the
/// instantaneous center of curvature; the integration is exact, so n
/// small steps equal one large step for constant commands.
pub fn step_kinematics(
    pose: &Pose,
    wheels: &WheelCommand,
    wheelbase: f64,
    dt: f64,
) -> Result<Pose> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !(wheelbase > 0.0) {
        return Err(Error::InvalidWheelbase(wheelbase));
    }
    let v = (wheels.left + wheels.right) / 2.0;
    let omega = (wheels.right - wheels.left) / wheelbase;
    if omega.abs() < 1e-9 {
        return Ok(Pose::new(
            pose.x + v * pose.theta.cos() * dt,
            pose.y + v * pose.theta.sin() * dt,
            pose.theta,
        ));
    }
    let radius = v / omega;
    let theta_next = pose.theta + omega * dt;
    Ok(Pose::new(
        pose.x + radius * (theta_next.sin() - pose.theta.sin()),
        pose.y - radius * (theta_next.cos() - pose.theta.cos()),
        theta_next,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_drive_advances_along_heading() {
        let pose = Pose::new(0.0, 0.0, 0.0);
        let wheels = WheelCommand {
            left: 0.22,
            right: 0.22,
        };
        let next = step_kinematics(&pose, &wheels, 0.1, 1.0).unwrap();
        assert!((next.x - 0.22).abs() < 1e-15);
        assert_eq!(next.y, 0.0);
        assert_eq!(next.theta, 0.0);
    }

    #[test]
    fn full_circle_returns_to_start() {
        // l = 0, r = 0.2, wheelbase = 0.1: omega = 2 rad/s, so one full
        // turn takes pi seconds.
        let pose = Pose::new(0.3, -0.2, 0.7);
        let wheels = WheelCommand {
            left: 0.0,
            right: 0.2,
        };
        let next = step_kinematics(&pose, &wheels, 0.1, std::f64::consts::PI).unwrap();
        assert!((next.x - pose.x).abs() < 1e-9);
        assert!((next.y - pose.y).abs() < 1e-9);
        assert!(normalize_angle(next.theta - pose.theta).abs() < 1e-9);
    }

    #[test]
    fn two_half_steps_equal_one_full_step() {
        let pose = Pose::new(1.0, 2.0, -0.4);
        let wheels = WheelCommand {
            left: 0.15,
            right: 0.3,
        };
        let full = step_kinematics(&pose, &wheels, 0.1, 0.5).unwrap();
        let half = step_kinematics(&pose, &wheels, 0.1, 0.25).unwrap();
        let halves = step_kinematics(&half, &wheels, 0.1, 0.25).unwrap();
        assert!((full.x - halves.x).abs() < 1e-12);
        assert!((full.y - halves.y).abs() < 1e-12);
        assert!(normalize_angle(full.theta - halves.theta).abs() < 1e-12);
    }

    #[test]
    fn invalid_dt_and_wheelbase_are_rejected() {
        let pose = Pose::new(0.0, 0.0, 0.0);
        let wheels = WheelCommand {
            left: 0.1,
            right: 0.1,
        };
        assert!(matches!(
            step_kinematics(&pose, &wheels, 0.1, 0.0),
            Err(Error::InvalidTimeStep(_))
        ));
        assert!(matches!(
            step_kinematics(&pose, &wheels, -0.1, 0.1),
            Err(Error::InvalidWheelbase(_))
        ));
    }

    #[test]
    fn theta_stays_normalized() {
        let mut pose = Pose::new(0.0, 0.0, 3.0);
        let wheels = WheelCommand {
            left: -0.1,
            right: 0.1,
        };
        for _ in 0..100 {
            pose = step_kinematics(&pose, &wheels, 0.1, 0.5).unwrap();
            assert!(pose.theta > -std::f64::consts::PI - 1e-12);
            assert!(pose.theta <= std::f64::consts::PI + 1e-12);
        }
    }
}
