//! Flat `key = value` configuration covering every tunable of the
//! pipeline, the controller and the simulator. Unknown keys are rejected
//! so tuning typos fail fast.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::sim::{EpisodeConfig, TrackParams};

/// The full benchmark configuration: episode tunables, track geometry,
/// the start-tile protocol and output paths.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub episode: EpisodeConfig,
    pub track: TrackParams,
    pub start_tiles: Vec<usize>,
    pub out_csv: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            episode: EpisodeConfig::default(),
            track: TrackParams::default(),
            // Five straight tiles, roughly 3-4 tiles apart on the
            // 18-tile loop.
            start_tiles: vec![2, 6, 10, 13, 16],
            out_csv: PathBuf::from("scores.csv"),
        }
    }
}

impl BenchConfig {
    /// Parses the `key = value` text format. `#` starts a comment; blank
    /// lines are skipped; keys may appear at most once.
    pub fn parse(text: &str) -> Result<BenchConfig> {
        let mut config = BenchConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            config.set(key, value.trim()).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", lineno + 1)),
                other => other,
            })?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<BenchConfig> {
        let text = std::fs::read_to_string(path)?;
        BenchConfig::parse(&text)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let e = &mut self.episode;
        match key {
            // perception
            "threshold_lo" => e.perception.threshold_lo = parse(key, value)?,
            "threshold_hi" => e.perception.threshold_hi = parse(key, value)?,
            "blur_radius" => e.perception.blur_radius = parse(key, value)?,
            "blur_sigma" => e.perception.blur_sigma = parse(key, value)?,
            "canny_low" => e.perception.canny_low = parse(key, value)?,
            "canny_high" => e.perception.canny_high = parse(key, value)?,
            "hough_rho_res" => e.perception.hough_rho_res = parse(key, value)?,
            "hough_theta_res" => e.perception.hough_theta_res = parse(key, value)?,
            "hough_vote_min" => e.perception.hough_vote_min = parse(key, value)?,
            "segment_min_len" => e.perception.segment_min_len = parse(key, value)?,
            "segment_max_gap" => e.perception.segment_max_gap = parse(key, value)?,
            "slope_min" => e.perception.guide.slope_min = parse(key, value)?,
            "lane_width_frac" => e.perception.guide.lane_width_frac = parse(key, value)?,
            "lookahead_frac" => e.perception.lookahead_frac = parse(key, value)?,
            // control logic
            "deadband_deg" => e.guidance.deadband_deg = parse(key, value)?,
            "recovery_deg" => e.guidance.recovery_deg = parse(key, value)?,
            "max_steer_deg" => e.guidance.max_steer_deg = parse(key, value)?,
            "give_up_frames" => e.guidance.give_up_frames = parse(key, value)?,
            // actuation
            "pid_kp" => e.pid.kp = parse(key, value)?,
            "pid_ki" => e.pid.ki = parse(key, value)?,
            "pid_kd" => e.pid.kd = parse(key, value)?,
            "integral_limit" => e.pid.integral_limit = parse(key, value)?,
            "cruise_speed" => e.drive.cruise_speed = parse(key, value)?,
            "wheelbase" => e.drive.wheelbase = parse(key, value)?,
            "wheel_speed_max" => e.drive.wheel_speed_max = parse(key, value)?,
            // camera
            "camera_height" => e.camera.height = parse(key, value)?,
            "camera_pitch" => e.camera.pitch = parse(key, value)?,
            "camera_fov" => e.camera.horizontal_fov = parse(key, value)?,
            "image_width" => e.camera.image_width = parse(key, value)?,
            "image_height" => e.camera.image_height = parse(key, value)?,
            // track and episodes
            "tile_size" => self.track.tile_size = parse(key, value)?,
            "lane_width" => self.track.lane_width = parse(key, value)?,
            "exit_margin" => e.exit_margin = parse(key, value)?,
            "episode_cap" => e.episode_cap = parse(key, value)?,
            "frame_delay" => e.frame_delay = parse(key, value)?,
            "start_tiles" => {
                let tiles: Result<Vec<usize>> = value
                    .split(',')
                    .map(|v| parse::<usize>("start_tiles", v.trim()))
                    .collect();
                self.start_tiles = tiles?;
            }
            // outputs
            "out_csv" => self.out_csv = PathBuf::from(value),
            "dump_frames" => {
                e.dump_dir = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                };
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Checks every field against its owning module's preconditions.
    pub fn validate(&self) -> Result<()> {
        let e = &self.episode;
        let p = &e.perception;
        let check = |ok: bool, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(p.threshold_lo <= p.threshold_hi, "threshold_lo > threshold_hi")?;
        check(p.blur_radius >= 1, "blur_radius must be >= 1")?;
        check(p.blur_sigma > 0.0, "blur_sigma must be positive")?;
        check(
            p.canny_low > 0 && p.canny_low <= p.canny_high,
            "need 0 < canny_low <= canny_high",
        )?;
        check(p.hough_rho_res > 0.0, "hough_rho_res must be positive")?;
        let theta_bins = 180.0 / p.hough_theta_res;
        check(
            p.hough_theta_res > 0.0 && (theta_bins - theta_bins.round()).abs() < 1e-9,
            "hough_theta_res must divide 180 evenly",
        )?;
        check(p.hough_vote_min >= 1, "hough_vote_min must be >= 1")?;
        check(p.segment_min_len > 0.0, "segment_min_len must be positive")?;
        check(p.segment_max_gap > 0.0, "segment_max_gap must be positive")?;
        check(p.guide.slope_min >= 0.0, "slope_min must be non-negative")?;
        check(
            p.guide.lane_width_frac > 0.0 && p.guide.lane_width_frac < 1.0,
            "lane_width_frac must be in (0, 1)",
        )?;
        check(
            p.lookahead_frac > 0.0 && p.lookahead_frac < 1.0,
            "lookahead_frac must be in (0, 1)",
        )?;
        check(e.guidance.deadband_deg >= 0.0, "deadband_deg must be non-negative")?;
        check(e.guidance.recovery_deg >= 0.0, "recovery_deg must be non-negative")?;
        check(e.guidance.max_steer_deg > 0.0, "max_steer_deg must be positive")?;
        check(e.pid.integral_limit > 0.0, "integral_limit must be positive")?;
        check(e.drive.cruise_speed > 0.0, "cruise_speed must be positive")?;
        check(e.drive.wheelbase > 0.0, "wheelbase must be positive")?;
        check(e.drive.wheel_speed_max > 0.0, "wheel_speed_max must be positive")?;
        check(e.camera.height > 0.0, "camera_height must be positive")?;
        check(
            e.camera.pitch > 0.0 && e.camera.pitch < std::f64::consts::FRAC_PI_2,
            "camera_pitch must be in (0, pi/2)",
        )?;
        check(
            e.camera.horizontal_fov > 0.0 && e.camera.horizontal_fov < std::f64::consts::PI,
            "camera_fov must be in (0, pi)",
        )?;
        check(
            e.camera.image_width >= 8 && e.camera.image_height >= 8,
            "image dimensions must be at least 8x8",
        )?;
        check(self.track.tile_size > 0.0, "tile_size must be positive")?;
        check(
            self.track.lane_width > 0.0 && self.track.lane_width * 2.0 < self.track.tile_size,
            "lane_width must be positive and the road must fit the tile",
        )?;
        check(e.exit_margin >= 0.0, "exit_margin must be non-negative")?;
        check(e.episode_cap > 0.0, "episode_cap must be positive")?;
        check(!self.start_tiles.is_empty(), "start_tiles must not be empty")?;
        let mut sorted = self.start_tiles.clone();
        sorted.sort_unstable();
        sorted.dedup();
        check(
            sorted.len() == self.start_tiles.len(),
            "start_tiles must be distinct",
        )?;
        Ok(())
    }

    /// Canonical dump; parsing it back yields an identical config.
    pub fn dump(&self) -> String {
        let e = &self.episode;
        let p = &e.perception;
        let tiles = self
            .start_tiles
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let dump_frames = e
            .dump_dir
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        format!(
            "# lane-pilot configuration\n\
             \n\
             # perception\n\
             threshold_lo = {}\n\
             threshold_hi = {}\n\
             blur_radius = {}\n\
             blur_sigma = {}\n\
             canny_low = {}\n\
             canny_high = {}\n\
             hough_rho_res = {}\n\
             hough_theta_res = {}\n\
             hough_vote_min = {}\n\
             segment_min_len = {}\n\
             segment_max_gap = {}\n\
             slope_min = {}\n\
             lane_width_frac = {}\n\
             lookahead_frac = {}\n\
             \n\
             # control logic\n\
             deadband_deg = {}\n\
             recovery_deg = {}\n\
             max_steer_deg = {}\n\
             give_up_frames = {}\n\
             \n\
             # actuation\n\
             pid_kp = {}\n\
             pid_ki = {}\n\
             pid_kd = {}\n\
             integral_limit = {}\n\
             cruise_speed = {}\n\
             wheelbase = {}\n\
             wheel_speed_max = {}\n\
             \n\
             # camera\n\
             camera_height = {}\n\
             camera_pitch = {}\n\
             camera_fov = {}\n\
             image_width = {}\n\
             image_height = {}\n\
             \n\
             # track and episodes\n\
             tile_size = {}\n\
             lane_width = {}\n\
             exit_margin = {}\n\
             episode_cap = {}\n\
             frame_delay = {}\n\
             start_tiles = {}\n\
             \n\
             # outputs\n\
             out_csv = {}\n\
             dump_frames = {}\n",
            p.threshold_lo,
            p.threshold_hi,
            p.blur_radius,
            p.blur_sigma,
            p.canny_low,
            p.canny_high,
            p.hough_rho_res,
            p.hough_theta_res,
            p.hough_vote_min,
            p.segment_min_len,
            p.segment_max_gap,
            p.guide.slope_min,
            p.guide.lane_width_frac,
            p.lookahead_frac,
            e.guidance.deadband_deg,
            e.guidance.recovery_deg,
            e.guidance.max_steer_deg,
            e.guidance.give_up_frames,
            e.pid.kp,
            e.pid.ki,
            e.pid.kd,
            e.pid.integral_limit,
            e.drive.cruise_speed,
            e.drive.wheelbase,
            e.drive.wheel_speed_max,
            e.camera.height,
            e.camera.pitch,
            e.camera.horizontal_fov,
            e.camera.image_width,
            e.camera.image_height,
            self.track.tile_size,
            self.track.lane_width,
            e.exit_margin,
            e.episode_cap,
            e.frame_delay,
            tiles,
            self.out_csv.display(),
            dump_frames,
        )
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_dump() {
        let config = BenchConfig::default();
        let reparsed = BenchConfig::parse(&config.dump()).unwrap();
        assert_eq!(reparsed, config);
    }

    #[test]
    fn modified_config_round_trips() {
        let mut config = BenchConfig::default();
        config.set("blur_sigma", "2.25").unwrap();
        config.set("episode_cap", "12.5").unwrap();
        config.set("start_tiles", "1, 4, 8").unwrap();
        config.set("dump_frames", "frames/out").unwrap();
        let reparsed = BenchConfig::parse(&config.dump()).unwrap();
        assert_eq!(reparsed, config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = BenchConfig::parse("blur_sgima = 1.4\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = BenchConfig::parse("blur_sigma = 1\nblur_sigma = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let config = BenchConfig::parse("# hello\n\nblur_sigma = 2.0 # trailing\n").unwrap();
        assert_eq!(config.episode.perception.blur_sigma, 2.0);
    }

    #[test]
    fn constraint_violations_are_config_errors() {
        for bad in [
            "threshold_lo = 250\nthreshold_hi = 100",
            "blur_radius = 0",
            "canny_low = 200\ncanny_high = 100",
            "hough_theta_res = 7",
            "camera_pitch = 2.0",
            "start_tiles = 2,2,3",
            "lane_width = 0.4",
        ] {
            let err = BenchConfig::parse(bad).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{bad} -> {err:?}");
        }
    }

    #[test]
    fn default_start_tiles_are_straights_roughly_three_apart() {
        let config = BenchConfig::default();
        let track = crate::sim::Track::ring(config.track);
        assert_eq!(config.start_tiles.len(), 5);
        for window in config.start_tiles.windows(2) {
            let gap = window[1] - window[0];
            assert!((3..=4).contains(&gap), "gap {gap}");
        }
        for &tile in &config.start_tiles {
            assert!(!track.tiles()[tile].kind.is_curve());
        }
    }
}
