//! Flat-ground ray-casting camera: every pixel below the horizon is cast
//! through a pinhole model onto the z = 0 plane and colored from the
//! track appearance at that world point. No 3-D objects, no lighting.

use crate::imaging::Frame;
use crate::sim::kinematics::Pose;
use crate::sim::track::{TileKind, Track};

pub const ROAD_GRAY: [u8; 3] = [40, 40, 40];
pub const EDGE_WHITE: [u8; 3] = [255, 255, 255];
pub const CENTER_YELLOW: [u8; 3] = [255, 220, 0];
pub const GROUND_GREEN: [u8; 3] = [20, 60, 20];
pub const SKY_BLUE: [u8; 3] = [120, 170, 220];

/// Painted marking dimensions (meters).
const EDGE_LINE_WIDTH: f64 = 0.05;
const CENTER_LINE_HALF_WIDTH: f64 = 0.0125;
const DASH_PERIOD: f64 = 0.20;
const DASH_ON: f64 = 0.10;

/// Pinhole camera pitched down toward the road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    /// Height above the ground plane, meters.
    pub height: f64,
    /// Downward pitch, radians.
    pub pitch: f64,
    /// Horizontal field of view, radians.
    pub horizontal_fov: f64,
    pub image_width: usize,
    pub image_height: usize,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            height: 0.11,
            pitch: 0.35,
            horizontal_fov: 1.2,
            image_width: 320,
            image_height: 240,
        }
    }
}

impl CameraModel {
    /// Focal length in pixels (square pixels).
    pub fn focal(&self) -> f64 {
        (self.image_width as f64 / 2.0) / (self.horizontal_fov / 2.0).tan()
    }

    /// Principal point; centered so mirrored pixel pairs see exactly
    /// mirrored rays.
    pub fn principal_point(&self) -> (f64, f64) {
        (
            (self.image_width as f64 - 1.0) / 2.0,
            (self.image_height as f64 - 1.0) / 2.0,
        )
    }

    /// Image row of the horizon: rays at or above it never reach the
    /// ground plane.
    pub fn horizon_row(&self) -> f64 {
        let (_, cy) = self.principal_point();
        cy - self.focal() * self.pitch.tan()
    }
}

/// Camera basis in world coordinates for a given vehicle pose.
struct CameraBasis {
    position: (f64, f64, f64),
    forward: (f64, f64, f64),
    right: (f64, f64, f64),
    down: (f64, f64, f64),
}

fn basis(camera: &CameraModel, pose: &Pose) -> CameraBasis {
    let (sin_t, cos_t) = pose.theta.sin_cos();
    let (sin_p, cos_p) = camera.pitch.sin_cos();
    CameraBasis {
        position: (pose.x, pose.y, camera.height),
        forward: (cos_p * cos_t, cos_p * sin_t, -sin_p),
        right: (sin_t, -cos_t, 0.0),
        down: (-sin_p * cos_t, -sin_p * sin_t, -cos_p),
    }
}

/// Intersects the ray through pixel (u, v) with the ground plane.
/// Returns the world point, or None for sky pixels.
pub fn pixel_to_ground(
    camera: &CameraModel,
    pose: &Pose,
    u: f64,
    v: f64,
) -> Option<(f64, f64)> {
    let b = basis(camera, pose);
    let f = camera.focal();
    let (cx, cy) = camera.principal_point();
    let a = (u - cx) / f;
    let d = (v - cy) / f;
    let dir_z = b.forward.2 + a * b.right.2 + d * b.down.2;
    if dir_z >= 0.0 {
        return None;
    }
    let t = -b.position.2 / dir_z;
    let wx = b.position.0 + t * (b.forward.0 + a * b.right.0 + d * b.down.0);
    let wy = b.position.1 + t * (b.forward.1 + a * b.right.1 + d * b.down.1);
    Some((wx, wy))
}

/// Projects a ground point back into the image. Returns None for points
/// behind the camera.
pub fn ground_to_pixel(
    camera: &CameraModel,
    pose: &Pose,
    world: (f64, f64),
) -> Option<(f64, f64)> {
    let b = basis(camera, pose);
    let rel = (
        world.0 - b.position.0,
        world.1 - b.position.1,
        -b.position.2,
    );
    let dot = |v: (f64, f64, f64)| rel.0 * v.0 + rel.1 * v.1 + rel.2 * v.2;
    let depth = dot(b.forward);
    if depth <= 1e-12 {
        return None;
    }
    let f = camera.focal();
    let (cx, cy) = camera.principal_point();
    Some((cx + f * dot(b.right) / depth, cy + f * dot(b.down) / depth))
}

/// Track appearance at a world point.
pub fn sample_track(track: &Track, wx: f64, wy: f64) -> [u8; 3] {
    let tile_index = match track.tile_at(wx, wy) {
        Some(i) => i,
        None => return GROUND_GREEN,
    };
    let tile = &track.tiles()[tile_index];
    let ts = track.tile_size();
    let lw = track.lane_width();
    let x0 = tile.col as f64 * ts;
    let y0 = tile.row as f64 * ts;

    // Lateral distance from the road middle and longitudinal coordinate
    // along it, both in meters. The dash phase is anchored symmetric
    // about the tile-local middle so mirrored tiles render mirrored dashes.
    let (lateral, longitudinal, road_len) = match tile.kind {
        TileKind::StraightEW => (wy - (y0 + ts / 2.0), wx - x0, ts),
        TileKind::StraightNS => (wx - (x0 + ts / 2.0), wy - y0, ts),
        curve => {
            let corner = match curve {
                TileKind::CurveNE => (x0 + ts, y0 + ts),
                TileKind::CurveNW => (x0, y0 + ts),
                TileKind::CurveSE => (x0 + ts, y0),
                TileKind::CurveSW => (x0, y0),
                _ => unreachable!(),
            };
            let rel = (wx - corner.0, wy - corner.1);
            let r = rel.0.hypot(rel.1);
            let phi = rel.1.atan2(rel.0);
            // Quadrant start angle for this corner's sector.
            let phi_lo = match curve {
                TileKind::CurveNE => -std::f64::consts::PI,
                TileKind::CurveNW => -std::f64::consts::FRAC_PI_2,
                TileKind::CurveSE => std::f64::consts::FRAC_PI_2,
                TileKind::CurveSW => 0.0,
                _ => unreachable!(),
            };
            let arc_mid_radius = ts / 2.0;
            (
                r - arc_mid_radius,
                (phi - phi_lo) * arc_mid_radius,
                std::f64::consts::FRAC_PI_2 * arc_mid_radius,
            )
        }
    };

    let lat = lateral.abs();
    if lat > lw {
        return GROUND_GREEN;
    }
    if lat >= lw - EDGE_LINE_WIDTH {
        return EDGE_WHITE;
    }
    if lat <= CENTER_LINE_HALF_WIDTH {
        let phase = (longitudinal - road_len / 2.0).abs() % DASH_PERIOD;
        if phase < DASH_ON {
            return CENTER_YELLOW;
        }
    }
    ROAD_GRAY
}

/// Renders the camera view of the track from a pose.
pub fn render_frame(track: &Track, pose: &Pose, camera: &CameraModel) -> Frame {
    let (w, h) = (camera.image_width, camera.image_height);
    let b = basis(camera, pose);
    let f = camera.focal();
    let (cx, cy) = camera.principal_point();
    let mut frame = Frame::rgb(w, h, SKY_BLUE);
    for v in 0..h {
        let d = (v as f64 - cy) / f;
        let dir_z = b.forward.2 + d * b.down.2;
        if dir_z >= 0.0 {
            continue; // sky row
        }
        let t = -b.position.2 / dir_z;
        let base_x = b.position.0 + t * (b.forward.0 + d * b.down.0);
        let base_y = b.position.1 + t * (b.forward.1 + d * b.down.1);
        for u in 0..w {
            let a = (u as f64 - cx) / f;
            let wx = base_x + t * a * b.right.0;
            let wy = base_y + t * a * b.right.1;
            let color = sample_track(track, wx, wy);
            frame.put_pixel(u, v, &color);
        }
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::to_grayscale;

    fn road_middle_pose(track: &Track) -> Pose {
        // Middle of a bottom-row straight, shifted from the lane center
        // onto the road middle (the dashed line), heading east.
        let ts = track.tile_size();
        Pose::new(2.5 * ts, 0.5 * ts, 0.0)
    }

    #[test]
    fn straight_road_view_is_left_right_symmetric() {
        let track = Track::default_loop();
        let camera = CameraModel::default();
        let pose = road_middle_pose(&track);
        let frame = render_frame(&track, &pose, &camera);
        // The cropped (pipeline-visible) region sees only the straight
        // road ahead; the scene there is mirror symmetric about the
        // center column up to a pixel of sampling aliasing.
        let w = camera.image_width;
        let mut mismatches = 0;
        for y in camera.image_height / 2..camera.image_height {
            for x in 0..w / 2 {
                let mx = w - 1 - x;
                let same = (0..3).all(|c| frame.get(x, y, c) == frame.get(mx, y, c));
                let shifted = x + 1 < w
                    && (0..3).all(|c| frame.get(x + 1, y, c) == frame.get(mx, y, c));
                if !same && !shifted {
                    mismatches += 1;
                }
            }
        }
        assert_eq!(mismatches, 0);
    }

    #[test]
    fn yellow_marking_luma_sits_inside_the_threshold_band() {
        let track = Track::default_loop();
        let camera = CameraModel::default();
        let frame = render_frame(&track, &road_middle_pose(&track), &camera);
        let gray = to_grayscale(&frame).unwrap();
        let mut yellow_pixels = 0;
        for y in 0..camera.image_height {
            for x in 0..camera.image_width {
                if (0..3).map(|c| frame.get(x, y, c)).collect::<Vec<_>>() == CENTER_YELLOW {
                    assert_eq!(gray.get(x, y, 0), 205);
                    yellow_pixels += 1;
                }
            }
        }
        assert!(yellow_pixels > 50, "dashed line barely visible: {yellow_pixels}");
        assert!((180..=245).contains(&205u8));
    }

    #[test]
    fn pixel_ground_round_trip_is_consistent() {
        let track = Track::default_loop();
        let camera = CameraModel::default();
        let pose = Pose::new(1.5 * track.tile_size(), 0.4 * track.tile_size(), 0.3);
        for (u, v) in [(10.0, 150.0), (160.0, 239.0), (300.0, 120.0), (42.0, 200.0)] {
            let ground = pixel_to_ground(&camera, &pose, u, v).expect("below horizon");
            let (pu, pv) = ground_to_pixel(&camera, &pose, ground).expect("in front");
            assert!(
                (pu - u).abs() < 0.5 && (pv - v).abs() < 0.5,
                "({u}, {v}) -> {ground:?} -> ({pu}, {pv})"
            );
        }
    }

    #[test]
    fn no_ground_pixel_above_the_horizon() {
        let track = Track::default_loop();
        let camera = CameraModel::default();
        for k in 0..8 {
            let pose = Pose::new(
                0.3 + 0.4 * k as f64,
                0.2 + 0.1 * k as f64,
                k as f64 * 0.9,
            );
            let frame = render_frame(&track, &pose, &camera);
            let horizon = camera.horizon_row();
            for v in 0..camera.image_height {
                if (v as f64) < horizon {
                    for u in 0..camera.image_width {
                        let px = [frame.get(u, v, 0), frame.get(u, v, 1), frame.get(u, v, 2)];
                        assert_eq!(px, SKY_BLUE, "ground pixel above horizon at ({u}, {v})");
                    }
                }
            }
        }
    }

    #[test]
    fn lane_center_view_has_marking_on_the_left() {
        // From the driven lane's center the dashed marking appears left
        // of the image center and the white edge right of it.
        let track = Track::default_loop();
        let camera = CameraModel::default();
        let ts = track.tile_size();
        let pose = Pose::new(2.5 * ts, 0.5 * ts - track.lane_width() / 2.0, 0.0);
        let frame = render_frame(&track, &pose, &camera);
        let mut yellow_cols = Vec::new();
        let mut white_cols = Vec::new();
        let y = 180; // a row in the cropped region
        for x in 0..camera.image_width {
            let px = [frame.get(x, y, 0), frame.get(x, y, 1), frame.get(x, y, 2)];
            if px == CENTER_YELLOW {
                yellow_cols.push(x);
            } else if px == EDGE_WHITE {
                white_cols.push(x);
            }
        }
        assert!(!white_cols.is_empty());
        let center = camera.image_width / 2;
        assert!(yellow_cols.iter().all(|&x| x < center) || yellow_cols.is_empty());
        assert!(white_cols.iter().any(|&x| x > center));
    }
}
