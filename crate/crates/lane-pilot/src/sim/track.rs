//! Tile-loop track model: an 18-tile ring on a 6x5 grid and the piecewise
//! centerline (segments and quarter-circle arcs) of the lane the vehicle
//! drives.

/// Square road tile variants. Curve names describe which two tile edges
/// the road connects; the arc center sits at the corner between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileKind {
    StraightNS,
    StraightEW,
    CurveNE,
    CurveNW,
    CurveSE,
    CurveSW,
}

impl TileKind {
    pub fn is_curve(&self) -> bool {
        !matches!(self, TileKind::StraightNS | TileKind::StraightEW)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tile {
    pub row: usize,
    pub col: usize,
    pub kind: TileKind,
}

/// One centerline piece. Arcs sweep counterclockwise for positive
/// `sweep`; the traversal direction of the piece follows the sweep sign.
#[derive(Debug, Clone, Copy)]
pub enum PathPiece {
    Line {
        start: (f64, f64),
        dir: (f64, f64),
        len: f64,
    },
    Arc {
        center: (f64, f64),
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl PathPiece {
    pub fn line_between(a: (f64, f64), b: (f64, f64)) -> PathPiece {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len = dx.hypot(dy);
        PathPiece::Line {
            start: a,
            dir: (dx / len, dy / len),
            len,
        }
    }

    pub fn len(&self) -> f64 {
        match self {
            PathPiece::Line { len, .. } => *len,
            PathPiece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn point_at(&self, s: f64) -> (f64, f64) {
        match self {
            PathPiece::Line { start, dir, .. } => (start.0 + dir.0 * s, start.1 + dir.1 * s),
            PathPiece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let phi = start_angle + sweep.signum() * s / radius;
                (center.0 + radius * phi.cos(), center.1 + radius * phi.sin())
            }
        }
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        match self {
            PathPiece::Line { dir, .. } => dir.1.atan2(dir.0),
            PathPiece::Arc {
                start_angle, sweep, radius, ..
            } => {
                let phi = start_angle + sweep.signum() * s / radius;
                // Tangent of a CCW arc leads the radius by 90 degrees.
                normalize_angle(phi + sweep.signum() * std::f64::consts::FRAC_PI_2)
            }
        }
    }

    /// Signed curvature along travel direction: positive curving left.
    pub fn curvature(&self) -> f64 {
        match self {
            PathPiece::Line { .. } => 0.0,
            PathPiece::Arc { radius, sweep, .. } => sweep.signum() / radius,
        }
    }

    /// Nearest point on the piece: returns (arclength, unsigned distance,
    /// signed lateral offset with positive to the LEFT of travel).
    pub fn project(&self, p: (f64, f64)) -> (f64, f64, f64) {
        match self {
            PathPiece::Line { start, dir, len } => {
                let rel = (p.0 - start.0, p.1 - start.1);
                let s = (rel.0 * dir.0 + rel.1 * dir.1).clamp(0.0, *len);
                let nearest = (start.0 + dir.0 * s, start.1 + dir.1 * s);
                let dist = (p.0 - nearest.0).hypot(p.1 - nearest.1);
                let side = dir.0 * (p.1 - nearest.1) - dir.1 * (p.0 - nearest.0);
                (s, dist, side.signum() * dist)
            }
            PathPiece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let rel = (p.0 - center.0, p.1 - center.1);
                let r = rel.0.hypot(rel.1);
                let phi = rel.1.atan2(rel.0);
                // Angular position relative to the start, measured along
                // the sweep direction.
                let along = if *sweep >= 0.0 {
                    (phi - start_angle).rem_euclid(std::f64::consts::TAU)
                } else {
                    (start_angle - phi).rem_euclid(std::f64::consts::TAU)
                };
                let s = if along <= sweep.abs() {
                    along * radius
                } else {
                    // Off the arc's angular range: clamp to the closer end.
                    let end = self.point_at(self.len());
                    let start_pt = self.point_at(0.0);
                    let d_start = (p.0 - start_pt.0).hypot(p.1 - start_pt.1);
                    let d_end = (p.0 - end.0).hypot(p.1 - end.1);
                    if d_start <= d_end {
                        0.0
                    } else {
                        self.len()
                    }
                };
                let nearest = self.point_at(s);
                let dist = (p.0 - nearest.0).hypot(p.1 - nearest.1);
                // Left of travel is toward the center on a CCW arc.
                let radial = r - *radius;
                let offset = if *sweep >= 0.0 { -radial } else { radial };
                (s, dist, offset)
            }
        }
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    // Normalizes to (-pi, pi].
    let t = theta.rem_euclid(std::f64::consts::TAU);
    if t > std::f64::consts::PI {
        t - std::f64::consts::TAU
    } else {
        t
    }
}

/// A closed piecewise path with arclength indexing.
#[derive(Debug, Clone)]
pub struct Path {
    pieces: Vec<PathPiece>,
    cumulative: Vec<f64>,
    total: f64,
}

/// Projection of a point onto the path.
#[derive(Debug, Clone, Copy)]
pub struct PathProjection {
    /// Arclength of the nearest point from the path start.
    pub arclength: f64,
    /// Signed lateral offset, positive to the left of travel.
    pub offset: f64,
    /// Unsigned distance to the nearest point.
    pub distance: f64,
    /// Travel heading at the nearest point.
    pub heading: f64,
    /// Signed curvature at the nearest point, positive curving left.
    pub curvature: f64,
    pub piece_index: usize,
}

impl Path {
    pub fn new(pieces: Vec<PathPiece>) -> Self {
        let mut cumulative = Vec::with_capacity(pieces.len());
        let mut total = 0.0;
        for piece in &pieces {
            cumulative.push(total);
            total += piece.len();
        }
        Path {
            pieces,
            cumulative,
            total,
        }
    }

    pub fn pieces(&self) -> &[PathPiece] {
        &self.pieces
    }

    pub fn total_len(&self) -> f64 {
        self.total
    }

    /// Arclength of the start of piece `i`.
    pub fn piece_start(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    pub fn point_at(&self, s: f64) -> (f64, f64) {
        let (i, local) = self.locate(s);
        self.pieces[i].point_at(local)
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        let (i, local) = self.locate(s);
        self.pieces[i].heading_at(local)
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.rem_euclid(self.total);
        let i = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (i, s - self.cumulative[i])
    }

    pub fn project(&self, p: (f64, f64)) -> PathProjection {
        let mut best: Option<PathProjection> = None;
        for (i, piece) in self.pieces.iter().enumerate() {
            let (s, dist, offset) = piece.project(p);
            if best.as_ref().map_or(true, |b| dist < b.distance) {
                best = Some(PathProjection {
                    arclength: self.cumulative[i] + s,
                    offset,
                    distance: dist,
                    heading: piece.heading_at(s),
                    curvature: piece.curvature(),
                    piece_index: i,
                });
            }
        }
        best.expect("path has at least one piece")
    }
}

/// Track geometry parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackParams {
    pub tile_size: f64,
    pub lane_width: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        TrackParams {
            tile_size: 0.585,
            lane_width: 0.22,
        }
    }
}

/// The closed tile loop, its grid lookup and the driven-lane centerline.
/// Tiles are ordered along the traversal; tile i owns centerline piece i.
#[derive(Debug, Clone)]
pub struct Track {
    tiles: Vec<Tile>,
    grid_rows: usize,
    grid_cols: usize,
    tile_size: f64,
    lane_width: f64,
    centerline: Path,
    lookup: Vec<Option<usize>>,
}

impl Track {
    /// The default 18-tile loop: the outer ring of a 6x5 grid, traversed
    /// counterclockwise in the right lane (4 corner curves, 14 straights).
    pub fn default_loop() -> Track {
        Track::ring(TrackParams::default())
    }

    pub fn ring(params: TrackParams) -> Track {
        let (rows, cols) = (5usize, 6usize);
        let ts = params.tile_size;
        let off = params.lane_width / 2.0;
        let half = ts / 2.0;
        let radius = half + off;

        let mut tiles = Vec::new();
        let mut pieces = Vec::new();

        let center = |r: usize, c: usize| ((c as f64 + 0.5) * ts, (r as f64 + 0.5) * ts);

        // Southwest corner: southbound in, eastbound out.
        tiles.push(Tile {
            row: 0,
            col: 0,
            kind: TileKind::CurveNE,
        });
        pieces.push(PathPiece::Arc {
            center: (ts, ts),
            radius,
            start_angle: std::f64::consts::PI,
            sweep: std::f64::consts::FRAC_PI_2,
        });
        // Bottom row, eastbound: lane center south of the road middle.
        for c in 1..cols - 1 {
            let (xc, yc) = center(0, c);
            tiles.push(Tile {
                row: 0,
                col: c,
                kind: TileKind::StraightEW,
            });
            pieces.push(PathPiece::line_between(
                (xc - half, yc - off),
                (xc + half, yc - off),
            ));
        }
        // Southeast corner: eastbound in, northbound out.
        tiles.push(Tile {
            row: 0,
            col: cols - 1,
            kind: TileKind::CurveNW,
        });
        pieces.push(PathPiece::Arc {
            center: ((cols - 1) as f64 * ts, ts),
            radius,
            start_angle: -std::f64::consts::FRAC_PI_2,
            sweep: std::f64::consts::FRAC_PI_2,
        });
        // Right column, northbound: lane center east of the road middle.
        for r in 1..rows - 1 {
            let (xc, yc) = center(r, cols - 1);
            tiles.push(Tile {
                row: r,
                col: cols - 1,
                kind: TileKind::StraightNS,
            });
            pieces.push(PathPiece::line_between(
                (xc + off, yc - half),
                (xc + off, yc + half),
            ));
        }
        // Northeast corner: northbound in, westbound out.
        tiles.push(Tile {
            row: rows - 1,
            col: cols - 1,
            kind: TileKind::CurveSW,
        });
        pieces.push(PathPiece::Arc {
            center: ((cols - 1) as f64 * ts, (rows - 1) as f64 * ts),
            radius,
            start_angle: 0.0,
            sweep: std::f64::consts::FRAC_PI_2,
        });
        // Top row, westbound.
        for c in (1..cols - 1).rev() {
            let (xc, yc) = center(rows - 1, c);
            tiles.push(Tile {
                row: rows - 1,
                col: c,
                kind: TileKind::StraightEW,
            });
            pieces.push(PathPiece::line_between(
                (xc + half, yc + off),
                (xc - half, yc + off),
            ));
        }
        // Northwest corner: westbound in, southbound out.
        tiles.push(Tile {
            row: rows - 1,
            col: 0,
            kind: TileKind::CurveSE,
        });
        pieces.push(PathPiece::Arc {
            center: (ts, (rows - 1) as f64 * ts),
            radius,
            start_angle: std::f64::consts::FRAC_PI_2,
            sweep: std::f64::consts::FRAC_PI_2,
        });
        // Left column, southbound.
        for r in (1..rows - 1).rev() {
            let (xc, yc) = center(r, 0);
            tiles.push(Tile {
                row: r,
                col: 0,
                kind: TileKind::StraightNS,
            });
            pieces.push(PathPiece::line_between(
                (xc - off, yc + half),
                (xc - off, yc - half),
            ));
        }

        Track::assemble(tiles, pieces, rows, cols, params)
    }

    fn assemble(
        tiles: Vec<Tile>,
        pieces: Vec<PathPiece>,
        grid_rows: usize,
        grid_cols: usize,
        params: TrackParams,
    ) -> Track {
        let mut lookup = vec![None; grid_rows * grid_cols];
        for (i, tile) in tiles.iter().enumerate() {
            lookup[tile.row * grid_cols + tile.col] = Some(i);
        }
        Track {
            tiles,
            grid_rows,
            grid_cols,
            tile_size: params.tile_size,
            lane_width: params.lane_width,
            centerline: Path::new(pieces),
            lookup,
        }
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn tile_size(&self) -> f64 {
        self.tile_size
    }

    pub fn lane_width(&self) -> f64 {
        self.lane_width
    }

    pub fn grid_rows(&self) -> usize {
        self.grid_rows
    }

    pub fn grid_cols(&self) -> usize {
        self.grid_cols
    }

    pub fn centerline(&self) -> &Path {
        &self.centerline
    }

    /// Loop index of the ring tile containing the world point, if any.
    pub fn tile_at(&self, x: f64, y: f64) -> Option<usize> {
        if x < 0.0 || y < 0.0 {
            return None;
        }
        let c = (x / self.tile_size) as usize;
        let r = (y / self.tile_size) as usize;
        if r >= self.grid_rows || c >= self.grid_cols {
            return None;
        }
        self.lookup[r * self.grid_cols + c]
    }

    /// Geometric mirror about the vertical plane through the grid middle.
    /// The traversal becomes clockwise and the driven lane swaps sides,
    /// which is exactly the scene the mirrored camera sees.
    pub fn mirrored(&self) -> Track {
        let width = self.grid_cols as f64 * self.tile_size;
        let mirror_kind = |k: TileKind| match k {
            TileKind::CurveNE => TileKind::CurveNW,
            TileKind::CurveNW => TileKind::CurveNE,
            TileKind::CurveSE => TileKind::CurveSW,
            TileKind::CurveSW => TileKind::CurveSE,
            other => other,
        };
        let tiles: Vec<Tile> = self
            .tiles
            .iter()
            .map(|t| Tile {
                row: t.row,
                col: self.grid_cols - 1 - t.col,
                kind: mirror_kind(t.kind),
            })
            .collect();
        let pieces: Vec<PathPiece> = self
            .centerline
            .pieces
            .iter()
            .map(|p| match *p {
                PathPiece::Line { start, dir, len } => PathPiece::Line {
                    start: (width - start.0, start.1),
                    dir: (-dir.0, dir.1),
                    len,
                },
                PathPiece::Arc {
                    center,
                    radius,
                    start_angle,
                    sweep,
                } => PathPiece::Arc {
                    center: (width - center.0, center.1),
                    radius,
                    start_angle: normalize_angle(std::f64::consts::PI - start_angle),
                    sweep: -sweep,
                },
            })
            .collect();
        Track::assemble(
            tiles,
            pieces,
            self.grid_rows,
            self.grid_cols,
            TrackParams {
                tile_size: self.tile_size,
                lane_width: self.lane_width,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_loop_has_18_tiles() {
        let track = Track::default_loop();
        assert_eq!(track.tiles().len(), 18);
    }

    #[test]
    fn ring_split_is_4_curves_14_straights() {
        let track = Track::default_loop();
        let curves = track.tiles().iter().filter(|t| t.kind.is_curve()).count();
        assert_eq!(curves, 4);
        assert_eq!(track.tiles().len() - curves, 14);
    }

    #[test]
    fn loop_closes_after_18_steps() {
        let track = Track::default_loop();
        let path = track.centerline();
        // Consecutive pieces connect end to start, and the last wraps to
        // the first.
        for i in 0..path.pieces().len() {
            let end = path.pieces()[i].point_at(path.pieces()[i].len());
            let next = path.pieces()[(i + 1) % path.pieces().len()].point_at(0.0);
            assert!(
                (end.0 - next.0).abs() < 1e-9 && (end.1 - next.1).abs() < 1e-9,
                "piece {i} ends at {end:?} but piece {} starts at {next:?}",
                (i + 1) % 18
            );
        }
        // Consecutive tiles share an edge (grid distance 1) around the loop.
        for i in 0..18 {
            let a = &track.tiles()[i];
            let b = &track.tiles()[(i + 1) % 18];
            let dist = a.row.abs_diff(b.row) + a.col.abs_diff(b.col);
            assert_eq!(dist, 1, "tiles {i} and {} are not neighbors", (i + 1) % 18);
        }
    }

    #[test]
    fn centerline_length_matches_geometry() {
        let track = Track::default_loop();
        let params = TrackParams::default();
        let radius = params.tile_size / 2.0 + params.lane_width / 2.0;
        let expected = 14.0 * params.tile_size + 4.0 * std::f64::consts::FRAC_PI_2 * radius;
        assert!((track.centerline().total_len() - expected).abs() < 1e-9);
    }

    #[test]
    fn headings_are_continuous_at_piece_joints() {
        let track = Track::default_loop();
        let path = track.centerline();
        for i in 0..path.pieces().len() {
            let h_end = path.pieces()[i].heading_at(path.pieces()[i].len());
            let j = (i + 1) % path.pieces().len();
            let h_next = path.pieces()[j].heading_at(0.0);
            let dh = normalize_angle(h_end - h_next).abs();
            assert!(dh < 1e-9, "heading jump of {dh} between pieces {i} and {j}");
        }
    }

    #[test]
    fn projection_recovers_on_path_points() {
        let track = Track::default_loop();
        let path = track.centerline();
        let total = path.total_len();
        for k in 0..200 {
            let s = total * k as f64 / 200.0;
            let p = path.point_at(s);
            let proj = path.project(p);
            assert!(proj.distance < 1e-9);
            assert!(proj.offset.abs() < 1e-9);
            let ds = (proj.arclength - s).abs();
            assert!(ds < 1e-6 || (total - ds) < 1e-6, "s {s} projected to {}", proj.arclength);
        }
    }

    #[test]
    fn offset_sign_is_left_positive() {
        let track = Track::default_loop();
        let path = track.centerline();
        // Sample a point slightly left of the path at several stations.
        for k in 0..40 {
            let s = path.total_len() * k as f64 / 40.0;
            let p = path.point_at(s);
            let h = path.heading_at(s);
            let left = (p.0 - 0.03 * h.sin(), p.1 + 0.03 * h.cos());
            let proj = path.project(left);
            assert!(
                (proj.offset - 0.03).abs() < 1e-6,
                "station {k}: offset {}",
                proj.offset
            );
        }
    }

    #[test]
    fn mirrored_track_mirrors_pointwise() {
        let track = Track::default_loop();
        let mirrored = track.mirrored();
        let width = track.grid_cols() as f64 * track.tile_size();
        let path = track.centerline();
        assert!((mirrored.centerline().total_len() - path.total_len()).abs() < 1e-9);
        for k in 0..100 {
            let s = path.total_len() * k as f64 / 100.0;
            let p = path.point_at(s);
            let q = mirrored.centerline().point_at(s);
            assert!((q.0 - (width - p.0)).abs() < 1e-9, "x at s={s}");
            assert!((q.1 - p.1).abs() < 1e-9, "y at s={s}");
        }
        // Curvature flips sign: left turns become right turns.
        let curves: f64 = path.pieces().iter().map(|p| p.curvature()).sum();
        let mcurves: f64 = mirrored.centerline().pieces().iter().map(|p| p.curvature()).sum();
        assert!((curves + mcurves).abs() < 1e-12);
    }

    #[test]
    fn tile_lookup_covers_ring_and_rejects_hole() {
        let track = Track::default_loop();
        let ts = track.tile_size();
        // Center of the bottom-left corner tile.
        assert_eq!(track.tile_at(0.5 * ts, 0.5 * ts), Some(0));
        // The hole in the middle of the ring.
        assert_eq!(track.tile_at(2.5 * ts, 2.5 * ts), None);
        // Outside the grid.
        assert_eq!(track.tile_at(-0.1, 0.1), None);
        assert_eq!(track.tile_at(100.0, 0.1), None);
    }
}
