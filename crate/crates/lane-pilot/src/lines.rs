//! Hough transform over the edge mask, deterministic extraction of line
//! segments, and aggregation of segments into the two guide lines that
//! steer the vehicle.

use crate::error::{Error, Result};
use crate::imaging::BinaryMask;

/// Polar-parameter vote grid. Lines are
/// `rho = (x - x_origin) cos(theta) + y sin(theta)` with theta in
/// [0, 180) degrees and rho in [-D, D], D the image diagonal. The rho
/// origin sits on the image's vertical mirror axis so the vote pattern
/// of a mirrored mask is exactly the mirrored vote pattern.
#[derive(Debug, Clone)]
pub struct HoughAccumulator {
    rho_bins: usize,
    theta_bins: usize,
    rho_res: f64,
    theta_res: f64,
    /// `rho_index = round(rho / rho_res) + rho_bins / 2`.
    rho_shift: usize,
    /// x coordinate rho is measured from: `(width - 1) / 2`.
    x_origin: f64,
    votes: Vec<u32>,
}

/// sin/cos of a [0, 180) degree angle with the reflection identities
/// `sin(180 - t) = sin(t)` and `cos(180 - t) = -cos(t)` holding
/// bit-exactly, so mirrored masks quantize onto mirrored bins.
pub(crate) fn symmetric_sin_cos(theta_deg: f64) -> (f64, f64) {
    if theta_deg > 90.0 {
        let (sin, cos) = (180.0 - theta_deg).to_radians().sin_cos();
        (sin, -cos)
    } else {
        theta_deg.to_radians().sin_cos()
    }
}

impl HoughAccumulator {
    pub fn rho_bins(&self) -> usize {
        self.rho_bins
    }

    pub fn theta_bins(&self) -> usize {
        self.theta_bins
    }

    pub fn rho_resolution(&self) -> f64 {
        self.rho_res
    }

    pub fn theta_resolution(&self) -> f64 {
        self.theta_res
    }

    #[inline]
    pub fn votes_at(&self, rho_index: usize, theta_index: usize) -> u32 {
        self.votes[rho_index * self.theta_bins + theta_index]
    }

    pub fn total_votes(&self) -> u64 {
        self.votes.iter().map(|&v| v as u64).sum()
    }

    /// Bin center in (rho, theta-degrees) coordinates.
    pub fn bin_center(&self, rho_index: usize, theta_index: usize) -> (f64, f64) {
        let rho = (rho_index as f64 - self.rho_shift as f64) * self.rho_res;
        let theta = theta_index as f64 * self.theta_res;
        (rho, theta)
    }

    /// x coordinate that rho distances are measured from.
    pub fn x_origin(&self) -> f64 {
        self.x_origin
    }

    /// Nearest rho bin index for a given rho value.
    pub fn rho_index(&self, rho: f64) -> usize {
        ((rho / self.rho_res).round() as isize + self.rho_shift as isize) as usize
    }

    /// The highest-vote cell, ties broken by ascending (rho_index,
    /// theta_index). None when the accumulator is empty of votes.
    pub fn top_peak(&self) -> Option<(usize, usize, u32)> {
        let mut best: Option<(usize, usize, u32)> = None;
        for r in 0..self.rho_bins {
            for t in 0..self.theta_bins {
                let v = self.votes_at(r, t);
                if v > 0 && best.map_or(true, |(_, _, bv)| v > bv) {
                    best = Some((r, t, v));
                }
            }
        }
        best
    }
}

/// A detected line segment with sub-pixel endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Segment {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Segment { x1, y1, x2, y2 }
    }

    pub fn length(&self) -> f64 {
        (self.x2 - self.x1).hypot(self.y2 - self.y1)
    }

    /// Image slope dy/dx; infinite for vertical segments.
    pub fn slope(&self) -> f64 {
        (self.y2 - self.y1) / (self.x2 - self.x1)
    }

    pub fn mirrored(&self, frame_width: f64) -> Segment {
        Segment {
            x1: frame_width - self.x1,
            y1: self.y1,
            x2: frame_width - self.x2,
            y2: self.y2,
        }
    }
}

/// A fitted guide line in x = f(y) form (safe for vertical lane lines).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuideLine {
    /// dx/dy; its sign equals the sign of the image slope dy/dx.
    pub dx_dy: f64,
    /// Abscissa at image row 0.
    pub x0: f64,
}

impl GuideLine {
    pub fn x_at(&self, row: f64) -> f64 {
        self.x0 + self.dx_dy * row
    }
}

/// The aggregated left/right guide lines and the aim-point column at the
/// lookahead row. At least one side is always present; pairs with no
/// surviving segments are represented as absent upstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidePair {
    pub left: Option<GuideLine>,
    pub right: Option<GuideLine>,
    pub guide_x: f64,
}

/// Votes every set pixel into all theta columns. `theta_res` (degrees)
/// must divide 180 evenly and `rho_res` must be positive.
pub fn hough_accumulate(edges: &BinaryMask, rho_res: f64, theta_res: f64) -> Result<HoughAccumulator> {
    if !(rho_res > 0.0) {
        return Err(Error::InvalidHoughResolution(format!(
            "rho_res must be positive, got {rho_res}"
        )));
    }
    let theta_bins = 180.0 / theta_res;
    if !(theta_res > 0.0) || (theta_bins - theta_bins.round()).abs() > 1e-9 {
        return Err(Error::InvalidHoughResolution(format!(
            "theta_res {theta_res} does not divide 180 evenly"
        )));
    }
    let theta_bins = theta_bins.round() as usize;
    let diagonal = ((edges.width() * edges.width() + edges.height() * edges.height()) as f64).sqrt();
    let rho_shift = (diagonal / rho_res).ceil() as usize;
    let rho_bins = 2 * rho_shift + 1;
    let x_origin = (edges.width() as f64 - 1.0) / 2.0;

    let trig: Vec<(f64, f64)> = (0..theta_bins)
        .map(|t| symmetric_sin_cos(t as f64 * theta_res))
        .map(|(sin, cos)| (cos, sin))
        .collect();

    let mut acc = HoughAccumulator {
        rho_bins,
        theta_bins,
        rho_res,
        theta_res,
        rho_shift,
        x_origin,
        votes: vec![0; rho_bins * theta_bins],
    };
    for (x, y) in edges.set_pixels() {
        for (t, &(cos, sin)) in trig.iter().enumerate() {
            let rho = (x as f64 - x_origin) * cos + y as f64 * sin;
            let r = acc.rho_index(rho);
            acc.votes[r * theta_bins + t] += 1;
        }
    }
    Ok(acc)
}

/// Extracts segments by walking each qualifying accumulator line across
/// the mask.
///
/// Peaks (cells with votes >= `vote_min`) are visited in descending vote
/// order, ties broken by ascending (rho_index, theta_index). Edge pixels
/// within perpendicular distance `rho_res` of the peak line are chained
/// in order of their projection onto the line; gaps > `max_gap` split
/// runs, runs shorter than `min_len` are dropped, and each edge pixel is
/// consumed by at most one emitted segment.
pub fn extract_segments(
    edges: &BinaryMask,
    acc: &HoughAccumulator,
    vote_min: u32,
    min_len: f64,
    max_gap: f64,
) -> Vec<Segment> {
    let mut peaks: Vec<(u32, usize, usize)> = Vec::new();
    for r in 0..acc.rho_bins {
        for t in 0..acc.theta_bins {
            let v = acc.votes_at(r, t);
            if v >= vote_min.max(1) {
                peaks.push((v, r, t));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let pixels = edges.set_pixels();
    let mut consumed = vec![false; pixels.len()];
    let mut segments = Vec::new();

    for (_, r, t) in peaks {
        let (rho, theta_deg) = acc.bin_center(r, t);
        let (sin, cos) = symmetric_sin_cos(theta_deg);

        // Unconsumed pixels near the line, keyed by their projection onto
        // the line direction (-sin, cos).
        let mut near: Vec<(f64, usize)> = Vec::new();
        for (i, &(x, y)) in pixels.iter().enumerate() {
            if consumed[i] {
                continue;
            }
            let (xf, yf) = (x as f64 - acc.x_origin, y as f64);
            if (xf * cos + yf * sin - rho).abs() <= acc.rho_res {
                near.push((-xf * sin + yf * cos, i));
            }
        }
        near.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        let mut run_start = 0;
        while run_start < near.len() {
            let mut run_end = run_start;
            while run_end + 1 < near.len() && near[run_end + 1].0 - near[run_end].0 <= max_gap {
                run_end += 1;
            }
            // Endpoints are the extreme chained pixels projected onto the
            // peak line (within rho_res of the raw pixels), so a thick
            // pixel chain still yields a segment with the line's exact
            // direction.
            let (t0, t1) = (near[run_start].0, near[run_end].0);
            let base = (acc.x_origin + rho * cos, rho * sin);
            let seg = Segment::new(
                base.0 - t0 * sin,
                base.1 + t0 * cos,
                base.0 - t1 * sin,
                base.1 + t1 * cos,
            );
            if seg.length() >= min_len {
                segments.push(seg);
                for &(_, i) in &near[run_start..=run_end] {
                    consumed[i] = true;
                }
            }
            run_start = run_end + 1;
        }
    }
    segments
}

/// Parameters for turning segments into guide lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuideParams {
    /// Segments with |image slope| below this are discarded as
    /// near-horizontal clutter.
    pub slope_min: f64,
    /// Nominal lane width as a fraction of the frame width; single-line
    /// fallback offsets the aim point by half of it toward lane center.
    pub lane_width_frac: f64,
}

impl Default for GuideParams {
    fn default() -> Self {
        GuideParams {
            slope_min: 0.3,
            lane_width_frac: 0.25,
        }
    }
}

/// Clusters segments by slope sign into left (negative image slope) and
/// right (positive) lines, length-weighted, and derives the aim-point
/// abscissa at `lookahead_row`. Returns None when no segment survives the
/// slope filter.
pub fn aggregate_guides(
    segments: &[Segment],
    frame_width: usize,
    frame_height: usize,
    lookahead_row: usize,
    params: &GuideParams,
) -> Option<GuidePair> {
    debug_assert!(lookahead_row < frame_height);
    let mut left = ClusterAcc::default();
    let mut right = ClusterAcc::default();
    let center_col = (frame_width as f64 - 1.0) / 2.0;

    for seg in segments {
        let dx = seg.x2 - seg.x1;
        let dy = seg.y2 - seg.y1;
        if dy == 0.0 || (dx != 0.0 && (dy / dx).abs() < params.slope_min) {
            continue; // near-horizontal
        }
        let dx_dy = dx / dy;
        let x0 = seg.x1 - dx_dy * seg.y1;
        let weight = seg.length();
        let is_left = if dx_dy < 0.0 {
            true
        } else if dx_dy > 0.0 {
            false
        } else {
            // Exactly vertical: classify by which side of center it runs.
            x0 + dx_dy * lookahead_row as f64 <= center_col
        };
        if is_left {
            left.add(dx_dy, x0, weight);
        } else {
            right.add(dx_dy, x0, weight);
        }
    }

    let left_line = left.line();
    let right_line = right.line();
    let half_lane_px = params.lane_width_frac * frame_width as f64 / 2.0;
    let row = lookahead_row as f64;
    let guide_x = match (&left_line, &right_line) {
        (Some(l), Some(r)) => (l.x_at(row) + r.x_at(row)) / 2.0,
        (Some(l), None) => l.x_at(row) + half_lane_px,
        (None, Some(r)) => r.x_at(row) - half_lane_px,
        (None, None) => return None,
    };
    Some(GuidePair {
        left: left_line,
        right: right_line,
        guide_x,
    })
}

#[derive(Default)]
struct ClusterAcc {
    weight: f64,
    dx_dy_sum: f64,
    x0_sum: f64,
}

impl ClusterAcc {
    fn add(&mut self, dx_dy: f64, x0: f64, weight: f64) {
        self.weight += weight;
        self.dx_dy_sum += dx_dy * weight;
        self.x0_sum += x0 * weight;
    }

    fn line(&self) -> Option<GuideLine> {
        if self.weight > 0.0 {
            Some(GuideLine {
                dx_dy: self.dx_dy_sum / self.weight,
                x0: self.x0_sum / self.weight,
            })
        } else {
            None
        }
    }
}
