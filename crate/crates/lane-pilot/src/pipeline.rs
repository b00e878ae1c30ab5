//! The composed per-frame perception chain: crop, grayscale, band
//! threshold, blur, edge detection, line extraction, guide aggregation
//! and the deviation angle.

use crate::edges::canny;
use crate::error::Result;
use crate::guidance::deviation_angle;
use crate::imaging::{band_threshold, crop_bottom_half, gaussian_blur, to_grayscale, BinaryMask, Frame};
use crate::lines::{aggregate_guides, extract_segments, hough_accumulate, GuidePair, GuideParams, Segment};

/// Tunables of the perception chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptionParams {
    /// Intensity band isolating the center marking from brighter edges.
    pub threshold_lo: u8,
    pub threshold_hi: u8,
    pub blur_radius: usize,
    pub blur_sigma: f64,
    pub canny_low: u32,
    pub canny_high: u32,
    pub hough_rho_res: f64,
    pub hough_theta_res: f64,
    pub hough_vote_min: u32,
    pub segment_min_len: f64,
    pub segment_max_gap: f64,
    pub guide: GuideParams,
    /// Aim-point row as a fraction of the cropped-frame height from its top.
    pub lookahead_frac: f64,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        PerceptionParams {
            threshold_lo: 180,
            threshold_hi: 245,
            blur_radius: 2,
            blur_sigma: 1.4,
            canny_low: 50,
            canny_high: 150,
            hough_rho_res: 1.0,
            hough_theta_res: 1.0,
            hough_vote_min: 20,
            segment_min_len: 10.0,
            segment_max_gap: 4.0,
            guide: GuideParams::default(),
            lookahead_frac: 0.25,
        }
    }
}

impl PerceptionParams {
    pub fn lookahead_row(&self, cropped_height: usize) -> usize {
        let row = (self.lookahead_frac * cropped_height as f64).round() as usize;
        row.min(cropped_height.saturating_sub(1))
    }
}

/// Everything the chain produced for one frame, kept around for overlays,
/// debugging and tests.
#[derive(Debug, Clone)]
pub struct Perception {
    /// Bottom-half crop of the input, original channel count.
    pub cropped: Frame,
    pub edges: BinaryMask,
    pub segments: Vec<Segment>,
    pub guides: Option<GuidePair>,
    pub lookahead_row: usize,
    /// Deviation angle in degrees; None when no lane was detected.
    pub angle_deg: Option<f64>,
}

/// Runs the full chain on a camera frame (RGB or already gray).
pub fn perceive(frame: &Frame, params: &PerceptionParams) -> Result<Perception> {
    let cropped = crop_bottom_half(frame)?;
    let gray = if cropped.channels() == 3 {
        to_grayscale(&cropped)?
    } else {
        cropped.clone()
    };
    let mask = band_threshold(&gray, params.threshold_lo, params.threshold_hi)?;
    let blurred = gaussian_blur(&mask.to_frame(), params.blur_radius, params.blur_sigma)?;
    let edges = canny(&blurred, params.canny_low, params.canny_high)?;
    let acc = hough_accumulate(&edges, params.hough_rho_res, params.hough_theta_res)?;
    let segments = extract_segments(
        &edges,
        &acc,
        params.hough_vote_min,
        params.segment_min_len,
        params.segment_max_gap,
    );
    let lookahead_row = params.lookahead_row(cropped.height());
    let guides = aggregate_guides(
        &segments,
        cropped.width(),
        cropped.height(),
        lookahead_row,
        &params.guide,
    );
    let angle_deg = match &guides {
        Some(pair) => Some(deviation_angle(
            pair,
            cropped.width(),
            cropped.height(),
            lookahead_row,
        )?),
        None => None,
    };
    Ok(Perception {
        cropped,
        edges,
        segments,
        guides,
        lookahead_row,
        angle_deg,
    })
}

/// Rasterizes detections onto a copy of the cropped frame: segments in
/// red, fitted guide lines in cyan, the aim point as a magenta cross.
pub fn render_overlay(perception: &Perception) -> Frame {
    let src = &perception.cropped;
    let (w, h) = (src.width(), src.height());
    let mut out = Frame::rgb(w, h, [0, 0, 0]);
    for y in 0..h {
        for x in 0..w {
            let color = if src.channels() == 3 {
                [src.get(x, y, 0), src.get(x, y, 1), src.get(x, y, 2)]
            } else {
                let g = src.get(x, y, 0);
                [g, g, g]
            };
            out.put_pixel(x, y, &color);
        }
    }
    for seg in &perception.segments {
        draw_line(&mut out, seg.x1, seg.y1, seg.x2, seg.y2, [255, 0, 0]);
    }
    if let Some(pair) = &perception.guides {
        for line in [pair.left, pair.right].into_iter().flatten() {
            draw_line(
                &mut out,
                line.x_at(0.0),
                0.0,
                line.x_at(h as f64 - 1.0),
                h as f64 - 1.0,
                [0, 255, 255],
            );
        }
        let row = perception.lookahead_row as f64;
        draw_line(&mut out, pair.guide_x - 4.0, row, pair.guide_x + 4.0, row, [255, 0, 255]);
        draw_line(&mut out, pair.guide_x, row - 4.0, pair.guide_x, row + 4.0, [255, 0, 255]);
    }
    out
}

/// Straightforward DDA rasterizer; endpoints may be off-frame.
fn draw_line(frame: &mut Frame, x1: f64, y1: f64, x2: f64, y2: f64, color: [u8; 3]) {
    let steps = (x2 - x1).abs().max((y2 - y1).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let x = x1 + (x2 - x1) * t;
        let y = y1 + (y2 - y1) * t;
        if x >= 0.0 && y >= 0.0 && (x as usize) < frame.width() && (y as usize) < frame.height() {
            frame.put_pixel(x as usize, y as usize, &color);
        }
    }
}
