//! Per-stage timing of the perception + control step on a representative
//! rendered frame.

use std::fmt;
use std::time::{Duration, Instant};

use crate::actuation::{wheel_speeds, PidController};
use crate::edges::canny;
use crate::error::{Error, Result};
use crate::guidance::{deviation_angle, update_state, ControllerState};
use crate::imaging::{band_threshold, crop_bottom_half, gaussian_blur, to_grayscale};
use crate::lines::{aggregate_guides, extract_segments, hough_accumulate};
use crate::sim::{render_frame, start_pose, Track};

use super::config::BenchConfig;

#[derive(Debug, Clone, Copy)]
pub struct StageStat {
    pub name: &'static str,
    pub median: Duration,
    pub p95: Duration,
}

#[derive(Debug, Clone)]
pub struct ProfileReport {
    pub iterations: usize,
    pub stages: Vec<StageStat>,
    pub end_to_end: StageStat,
    /// Frames per second implied by the median end-to-end time.
    pub fps: f64,
}

impl fmt::Display for ProfileReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "perception + control timing over {} iteration(s)",
            self.iterations
        )?;
        writeln!(f, "{:<12} {:>12} {:>12}", "stage", "median_ms", "p95_ms")?;
        for stage in &self.stages {
            writeln!(
                f,
                "{:<12} {:>12.4} {:>12.4}",
                stage.name,
                stage.median.as_secs_f64() * 1e3,
                stage.p95.as_secs_f64() * 1e3
            )?;
        }
        writeln!(
            f,
            "{:<12} {:>12.4} {:>12.4}",
            "end_to_end",
            self.end_to_end.median.as_secs_f64() * 1e3,
            self.end_to_end.p95.as_secs_f64() * 1e3
        )?;
        write!(f, "end-to-end throughput: {:.1} frames/second", self.fps)
    }
}

struct StageClock {
    samples: Vec<Vec<Duration>>,
}

impl StageClock {
    fn new(stages: usize, iterations: usize) -> Self {
        StageClock {
            samples: vec![Vec::with_capacity(iterations); stages],
        }
    }

    fn time<T>(&mut self, stage: usize, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.samples[stage].push(start.elapsed());
        out
    }
}

fn stat(name: &'static str, samples: &[Duration]) -> StageStat {
    let mut sorted = samples.to_vec();
    sorted.sort();
    let median = sorted[sorted.len() / 2];
    let p95 = sorted[((sorted.len() as f64 * 0.95).ceil() as usize).saturating_sub(1)];
    StageStat { name, median, p95 }
}

/// Renders one representative frame and times the full perception +
/// control step `iterations` times, reporting per-stage medians/p95 and
/// the end-to-end frame rate.
pub fn profile_pipeline(config: &BenchConfig, iterations: usize) -> Result<ProfileReport> {
    if iterations < 1 {
        return Err(Error::Config("profile needs at least one iteration".into()));
    }
    config.validate()?;
    let track = Track::ring(config.track);
    let pose = start_pose(&track, config.start_tiles[0])?;
    let frame = render_frame(&track, &pose, &config.episode.camera);
    let params = &config.episode.perception;
    let guidance = &config.episode.guidance;

    const STAGE_NAMES: [&str; 6] = ["blur", "canny", "hough", "aggregate", "guidance", "pid"];
    let mut clock = StageClock::new(STAGE_NAMES.len(), iterations);
    let mut e2e = Vec::with_capacity(iterations);
    let mut state = ControllerState::default();
    let mut pid = PidController::new(
        config.episode.pid.kp,
        config.episode.pid.ki,
        config.episode.pid.kd,
        config.episode.pid.integral_limit,
    );

    for _ in 0..iterations {
        let start = Instant::now();
        let cropped = crop_bottom_half(&frame)?;
        let gray = to_grayscale(&cropped)?;
        let mask = band_threshold(&gray, params.threshold_lo, params.threshold_hi)?;
        let blurred = clock.time(0, || {
            gaussian_blur(&mask.to_frame(), params.blur_radius, params.blur_sigma)
        })?;
        let edges = clock.time(1, || canny(&blurred, params.canny_low, params.canny_high))?;
        let segments = clock.time(2, || -> Result<_> {
            let acc = hough_accumulate(&edges, params.hough_rho_res, params.hough_theta_res)?;
            Ok(extract_segments(
                &edges,
                &acc,
                params.hough_vote_min,
                params.segment_min_len,
                params.segment_max_gap,
            ))
        })?;
        let lookahead = params.lookahead_row(cropped.height());
        let guides = clock.time(3, || {
            aggregate_guides(
                &segments,
                cropped.width(),
                cropped.height(),
                lookahead,
                &params.guide,
            )
        });
        let steering = clock.time(4, || -> Result<_> {
            let angle = match &guides {
                Some(pair) => Some(deviation_angle(
                    pair,
                    cropped.width(),
                    cropped.height(),
                    lookahead,
                )?),
                None => None,
            };
            let (next, cmd) = update_state(&state, angle, guidance);
            state = next;
            Ok(cmd)
        })?;
        clock.time(5, || -> Result<_> {
            let omega = pid.step(-steering.angle_deg, crate::sim::SIM_DT)?;
            wheel_speeds(
                config.episode.drive.cruise_speed,
                omega,
                config.episode.drive.wheelbase,
                config.episode.drive.wheel_speed_max,
            )
        })?;
        e2e.push(start.elapsed());
    }

    let stages: Vec<StageStat> = STAGE_NAMES
        .iter()
        .zip(&clock.samples)
        .map(|(name, samples)| stat(name, samples))
        .collect();
    let end_to_end = stat("end_to_end", &e2e);
    let fps = 1.0 / end_to_end.median.as_secs_f64().max(1e-12);
    Ok(ProfileReport {
        iterations,
        stages,
        end_to_end,
        fps,
    })
}
