//! Offline frame processing: run the perception pipeline over a
//! directory of image files and log one angle line per frame.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::guidance::{format_log_line, update_state, ControllerState};
use crate::imaging::{decode_image, encode_image};
use crate::pipeline::{perceive, render_overlay};

use super::config::BenchConfig;

/// Outcome of an offline processing run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProcessSummary {
    pub frames: usize,
    /// Frames that could not be decoded or processed (logged as NA).
    pub failures: usize,
}

/// Processes every `.ppm`/`.pgm` file in `input_dir` in lexicographic
/// filename order. Appends `frame_index,angle_deg_or_NA,steering_deg,direction`
/// lines to the log; failures log NA and processing continues. Controller
/// state carries across frames, as it would on the vehicle.
pub fn process_frames(
    input_dir: &Path,
    config: &BenchConfig,
    log_path: &Path,
    overlays_dir: Option<&Path>,
) -> Result<ProcessSummary> {
    let mut names: Vec<String> = std::fs::read_dir(input_dir)?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.path().is_file())
        .filter_map(|entry| entry.file_name().into_string().ok())
        .filter(|name| {
            let lower = name.to_ascii_lowercase();
            lower.ends_with(".ppm") || lower.ends_with(".pgm")
        })
        .collect();
    names.sort();

    if names.is_empty() {
        eprintln!(
            "warning: no .ppm/.pgm frames found in {}",
            input_dir.display()
        );
    }
    if let Some(dir) = overlays_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut log = std::io::BufWriter::new(std::fs::File::create(log_path)?);
    let mut state = ControllerState::default();
    let mut failures = 0usize;

    for (index, name) in names.iter().enumerate() {
        let angle = std::fs::read(input_dir.join(name))
            .ok()
            .and_then(|bytes| decode_image(&bytes).ok())
            .and_then(|frame| perceive(&frame, &config.episode.perception).ok())
            .map(|perception| {
                if let Some(dir) = overlays_dir {
                    let overlay = render_overlay(&perception);
                    let path = dir.join(format!("overlay_{index:06}.ppm"));
                    if std::fs::write(path, encode_image(&overlay)).is_err() {
                        failures += 1;
                    }
                }
                perception.angle_deg
            });
        if angle.is_none() {
            failures += 1;
        }
        // A frame that could not be read is a lost frame to the control
        // logic: same recovery path as "no lane detected".
        let (next, cmd) = update_state(&state, angle.flatten(), &config.episode.guidance);
        writeln!(
            log,
            "{}",
            format_log_line(index, angle.flatten(), &cmd, next.direction)
        )?;
        state = next;
    }
    log.flush()?;
    Ok(ProcessSummary {
        frames: names.len(),
        failures,
    })
}
