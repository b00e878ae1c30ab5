//! Gradient computation and the Canny edge detector: Sobel responses,
//! integer L2 magnitude, 4-bin non-maximum suppression and double-threshold
//! hysteresis linking.
//!
//! The input is expected to be blurred already; the pipeline treats the
//! blur as a separate preceding stage and composes the two.

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Frame};

/// Per-pixel Sobel responses and their rounded L2 magnitude.
#[derive(Debug, Clone)]
pub struct GradientField {
    width: usize,
    height: usize,
    pub gx: Vec<i32>,
    pub gy: Vec<i32>,
    pub magnitude: Vec<i32>,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Gradient magnitude rendered as a gray frame for debug dumps,
    /// scaled so the maximum possible response maps to 255.
    pub fn magnitude_frame(&self) -> Frame {
        // Max response of the 3x3 Sobel kernels on 8-bit input is 4 * 255
        // per axis, sqrt(2) * 1020 overall.
        let scale = 255.0 / (1020.0 * std::f64::consts::SQRT_2);
        let data = self
            .magnitude
            .iter()
            .map(|&m| (m as f64 * scale).round().clamp(0.0, 255.0) as u8)
            .collect();
        Frame::from_data(self.width, self.height, 1, data).expect("sized to match")
    }
}

/// 3x3 Sobel gradients with edge replication at the borders.
///
/// The x kernel is `[[-1,0,1],[-2,0,2],[-1,0,1]]`; the y kernel is its
/// transpose with positive y pointing down the image.
pub fn sobel_gradients(gray: &Frame) -> Result<GradientField> {
    if gray.channels() != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            actual: gray.channels(),
        });
    }
    let (w, h) = (gray.width(), gray.height());
    if w < 3 || h < 3 {
        return Err(Error::DegenerateImage(format!(
            "sobel needs at least 3x3 pixels, got {w}x{h}"
        )));
    }
    let mut gx = vec![0i32; w * h];
    let mut gy = vec![0i32; w * h];
    let mut magnitude = vec![0i32; w * h];
    let sample = |x: isize, y: isize| -> i32 {
        let cx = x.clamp(0, w as isize - 1) as usize;
        let cy = y.clamp(0, h as isize - 1) as usize;
        gray.get(cx, cy, 0) as i32
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| sample(x + dx, y + dy);
            let dx = p(1, -1) + 2 * p(1, 0) + p(1, 1) - p(-1, -1) - 2 * p(-1, 0) - p(-1, 1);
            let dy = p(-1, 1) + 2 * p(0, 1) + p(1, 1) - p(-1, -1) - 2 * p(0, -1) - p(1, -1);
            let i = y as usize * w + x as usize;
            gx[i] = dx;
            gy[i] = dy;
            magnitude[i] = (((dx * dx + dy * dy) as f64).sqrt()).round() as i32;
        }
    }
    Ok(GradientField {
        width: w,
        height: h,
        gx,
        gy,
        magnitude,
    })
}

/// Gradient direction quantized to 4 bins: 0 (edge vertical), 45, 90
/// (edge horizontal) and 135 degrees, with bin boundaries at 22.5-degree
/// steps of atan2(gy, gx) folded to [0, 180).
///
/// Implemented with |gx|/|gy| comparisons instead of atan2 so the result
/// is exactly invariant under horizontal mirroring (gx -> -gx).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionBin {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

pub fn quantize_direction(gx: i32, gy: i32) -> DirectionBin {
    const TAN_22_5: f64 = 0.41421356237309503; // tan(pi/8)
    let ax = gx.abs() as f64;
    let ay = gy.abs() as f64;
    if ay <= ax * TAN_22_5 {
        DirectionBin::Deg0
    } else if ax < ay * TAN_22_5 {
        DirectionBin::Deg90
    } else if (gx >= 0) == (gy >= 0) {
        DirectionBin::Deg45
    } else {
        DirectionBin::Deg135
    }
}

/// Non-maximum suppression: keeps pixels whose magnitude is >= both
/// neighbors along the quantized gradient direction (keep-on-tie, so
/// plateau edges are never lost). The outermost pixel ring is suppressed;
/// its replicated-border gradients carry no direction information.
pub fn non_maximum_suppression(field: &GradientField) -> BinaryMask {
    let (w, h) = (field.width, field.height);
    let mut kept = BinaryMask::new(w, h);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = field.idx(x, y);
            let m = field.magnitude[i];
            if m == 0 {
                continue;
            }
            let (a, b) = match quantize_direction(field.gx[i], field.gy[i]) {
                DirectionBin::Deg0 => (field.idx(x - 1, y), field.idx(x + 1, y)),
                DirectionBin::Deg45 => (field.idx(x - 1, y - 1), field.idx(x + 1, y + 1)),
                DirectionBin::Deg90 => (field.idx(x, y - 1), field.idx(x, y + 1)),
                DirectionBin::Deg135 => (field.idx(x + 1, y - 1), field.idx(x - 1, y + 1)),
            };
            if m >= field.magnitude[a] && m >= field.magnitude[b] {
                kept.set(x, y, true);
            }
        }
    }
    kept
}

/// Canny edge detection on an already-blurred gray frame.
///
/// Pixels with magnitude >= `high` seed the edge map; pixels with
/// magnitude >= `low` are kept iff 8-connected (transitively) to a seed.
pub fn canny(gray: &Frame, low: u32, high: u32) -> Result<BinaryMask> {
    if low == 0 || low > high {
        return Err(Error::InvalidCannyThresholds { low, high });
    }
    let field = sobel_gradients(gray)?;
    let survivors = non_maximum_suppression(&field);
    Ok(hysteresis(&field, &survivors, low as i32, high as i32))
}

/// Deterministic flood fill from strong seeds in row-major order.
fn hysteresis(field: &GradientField, survivors: &BinaryMask, low: i32, high: i32) -> BinaryMask {
    let (w, h) = (field.width, field.height);
    let mut edges = BinaryMask::new(w, h);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !survivors.get(x, y) || field.magnitude[i] < high || edges.get(x, y) {
                continue;
            }
            edges.set(x, y, true);
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nx = cx as isize + dx;
                        let ny = cy as isize + dy;
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if edges.get(nx, ny)
                            || !survivors.get(nx, ny)
                            || field.magnitude[ny * w + nx] < low
                        {
                            continue;
                        }
                        edges.set(nx, ny, true);
                        stack.push((nx, ny));
                    }
                }
            }
        }
    }
    edges
}
