//! Low-cost lane following on classical computer vision, with a
//! closed-loop 2D simulator for benchmarking it.
//!
//! The perception side mirrors a small real-time stack: crop and
//! grayscale the camera frame, band-threshold the center lane marking,
//! blur, run Canny edge detection and a Hough line transform, aggregate
//! the segments into two guide lines and derive a steering angle from
//! the aim point. A one-integer direction memory steers recovery when
//! the lane is lost, and a PID converts steering demands into
//! differential-drive wheel speeds.
//!
//! The simulation side provides an 18-tile loop track, a flat-ground
//! pinhole renderer and exact differential-drive kinematics, plus a
//! 5-episode benchmark protocol scoring survival seconds and tiles
//! traversed.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability, or the `lane-pilot` binary for the batch CLI.

pub mod actuation;
pub mod bench;
pub mod edges;
pub mod error;
pub mod guidance;
pub mod imaging;
pub mod lines;
pub mod pipeline;
pub mod sim;

pub use error::{Error, Result};
