//! Closed-loop test bed: track model, differential-drive kinematics,
//! synthetic ground-plane renderer and episode execution.

mod episode;
mod kinematics;
mod render;
mod track;

pub use episode::{
    lane_metrics, run_episode, run_episode_traced, start_pose, ControllerMode, DriveParams,
    EpisodeConfig, EpisodeTrace, LaneMetrics, PidParams, RunMetrics, StepRecord,
    DEFAULT_EXIT_MARGIN, SIM_DT,
};
pub use kinematics::{step_kinematics, Pose};
pub use render::{
    ground_to_pixel, pixel_to_ground, render_frame, sample_track, CameraModel, CENTER_YELLOW,
    EDGE_WHITE, GROUND_GREEN, ROAD_GRAY, SKY_BLUE,
};
pub use track::{normalize_angle, Path, PathPiece, PathProjection, Tile, TileKind, Track, TrackParams};
