//! Deviation-angle trigonometry and the stateful control logic: a
//! single-integer direction memory converts lane detections (or their
//! absence) into a steering angle.

use crate::error::{Error, Result};
use crate::lines::GuidePair;

/// Control-logic tunables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceParams {
    /// Angles at or below this magnitude count as "straight" and clear
    /// the direction memory.
    pub deadband_deg: f64,
    /// Fixed turn toward the remembered direction while the lane is lost.
    pub recovery_deg: f64,
    /// Steering saturation.
    pub max_steer_deg: f64,
    /// After this many consecutive lane-less frames the command reverts
    /// to straight ahead instead of circling forever.
    pub give_up_frames: u32,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        GuidanceParams {
            deadband_deg: 5.0,
            recovery_deg: 25.0,
            max_steer_deg: 30.0,
            give_up_frames: 90,
        }
    }
}

/// The vehicle's internal state: the last committed turn direction
/// (-1, 0 or +1), the most recent valid deviation angle, and how many
/// frames have passed without a lane detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub direction: i8,
    pub last_angle: f64,
    pub frames_without_lane: u32,
}

impl Default for ControllerState {
    fn default() -> Self {
        ControllerState {
            direction: 0,
            last_angle: 0.0,
            frames_without_lane: 0,
        }
    }
}

/// A bounded steering command, degrees, positive steering right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringCommand {
    pub angle_deg: f64,
}

/// Angle between straight ahead and the ray from the bottom-center of the
/// cropped frame to the aim point, positive when the aim point is right
/// of center. The center column of a w-pixel raster is (w - 1) / 2, the
/// mirror axis of the pixel grid.
pub fn deviation_angle(
    guides: &GuidePair,
    frame_width: usize,
    frame_height: usize,
    lookahead_row: usize,
) -> Result<f64> {
    if lookahead_row >= frame_height {
        return Err(Error::InvalidLookahead {
            row: lookahead_row,
            height: frame_height,
        });
    }
    let dx = guides.guide_x - (frame_width as f64 - 1.0) / 2.0;
    let baseline = (frame_height - lookahead_row) as f64;
    Ok((dx / baseline).atan().to_degrees())
}

/// One control-logic step.
///
/// With a fresh angle: clamp it into a steering command, commit the turn
/// direction when the angle exceeds the deadband, remember the angle.
/// With no detection: keep turning toward the remembered direction, or
/// straight ahead once the give-up count is exceeded.
pub fn update_state(
    state: &ControllerState,
    angle_deg: Option<f64>,
    params: &GuidanceParams,
) -> (ControllerState, SteeringCommand) {
    match angle_deg {
        Some(angle) => {
            let steering = angle.clamp(-params.max_steer_deg, params.max_steer_deg);
            let direction = if angle > params.deadband_deg {
                1
            } else if angle < -params.deadband_deg {
                -1
            } else {
                0
            };
            (
                ControllerState {
                    direction,
                    last_angle: angle,
                    frames_without_lane: 0,
                },
                SteeringCommand {
                    angle_deg: steering,
                },
            )
        }
        None => {
            let frames_without_lane = state.frames_without_lane + 1;
            let angle_deg = if frames_without_lane > params.give_up_frames {
                0.0
            } else {
                state.direction as f64 * params.recovery_deg
            };
            (
                ControllerState {
                    frames_without_lane,
                    ..*state
                },
                SteeringCommand { angle_deg },
            )
        }
    }
}

/// One line of the angle log: `frame_index,angle_deg_or_NA,steering_deg,direction`.
pub fn format_log_line(
    frame_index: usize,
    angle_deg: Option<f64>,
    steering: &SteeringCommand,
    direction: i8,
) -> String {
    let angle = match angle_deg {
        Some(a) => format!("{a:.3}"),
        None => "NA".to_string(),
    };
    format!("{frame_index},{angle},{:.3},{direction}", steering.angle_deg)
}
