//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // ----- image file parsing -----
    #[error("unsupported magic number (expected P5 or P6)")]
    BadMagic,
    #[error("malformed image header: {0}")]
    MalformedHeader(String),
    #[error("truncated image payload: expected {expected} bytes, got {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),

    // ----- raster operation contracts -----
    #[error("expected a {expected}-channel frame, got {actual} channels")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("degenerate image: {0}")]
    DegenerateImage(String),
    #[error("invalid threshold band: lo {lo} > hi {hi}")]
    InvalidThresholdBand { lo: u8, hi: u8 },
    #[error("invalid blur parameters: radius {radius}, sigma {sigma}")]
    InvalidBlurParams { radius: usize, sigma: f64 },
    #[error("invalid canny thresholds: low {low}, high {high} (need 0 < low <= high)")]
    InvalidCannyThresholds { low: u32, high: u32 },
    #[error("invalid hough resolution: {0}")]
    InvalidHoughResolution(String),

    // ----- control / simulation contracts -----
    #[error("lookahead row {row} is at or below the frame bottom ({height} rows)")]
    InvalidLookahead { row: usize, height: usize },
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("wheelbase must be positive, got {0}")]
    InvalidWheelbase(f64),
    #[error("invalid start tile {0}: {1}")]
    InvalidStartTile(usize, String),

    // ----- configuration and IO -----
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
