//! The 5-episode benchmark protocol and its score table.

use crate::error::{Error, Result};
use crate::sim::{run_episode, RunMetrics, Track};

use super::config::BenchConfig;

/// One benchmark row. Survival is stored in deciseconds so the printed
/// one-decimal values and their cumulative sum are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeScore {
    pub start_tile: usize,
    pub survival_ds: u32,
    pub tiles: u32,
}

impl EpisodeScore {
    fn from_metrics(start_tile: usize, metrics: &RunMetrics) -> Self {
        EpisodeScore {
            start_tile,
            survival_ds: (metrics.survival * 10.0).round() as u32,
            tiles: metrics.tiles_traversed,
        }
    }

    pub fn survival_seconds(&self) -> f64 {
        self.survival_ds as f64 / 10.0
    }
}

/// Per-episode rows plus exact cumulative sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTable {
    pub rows: Vec<EpisodeScore>,
}

impl ScoreTable {
    pub fn cumulative_survival_ds(&self) -> u32 {
        self.rows.iter().map(|r| r.survival_ds).sum()
    }

    pub fn cumulative_tiles(&self) -> u32 {
        self.rows.iter().map(|r| r.tiles).sum()
    }

    /// The combined score in the `survival/tiles` shorthand, e.g. `37.4/12`.
    pub fn cumulative_label(&self) -> String {
        format!(
            "{}/{}",
            format_ds(self.cumulative_survival_ds()),
            self.cumulative_tiles()
        )
    }

    /// CSV form: header, one row per episode, final cumulative row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,start_tile,survival_s,tiles\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                row.start_tile,
                format_ds(row.survival_ds),
                row.tiles
            ));
        }
        out.push_str(&format!(
            "cumulative,,{},{}\n",
            format_ds(self.cumulative_survival_ds()),
            self.cumulative_tiles()
        ));
        out
    }
}

fn format_ds(ds: u32) -> String {
    format!("{}.{}", ds / 10, ds % 10)
}

/// Runs one episode per configured start tile and collects the table.
/// Start tiles are validated before any episode runs. `jobs > 1` runs
/// episodes in parallel workers; rows stay ordered by episode index.
pub fn run_benchmark(config: &BenchConfig, jobs: usize) -> Result<ScoreTable> {
    config.validate()?;
    let track = Track::ring(config.track);
    for &tile in &config.start_tiles {
        if tile >= track.tiles().len() {
            return Err(Error::Config(format!(
                "start tile {tile} out of range (loop has {} tiles)",
                track.tiles().len()
            )));
        }
        if track.tiles()[tile].kind.is_curve() {
            return Err(Error::Config(format!(
                "start tile {tile} is a curve; episodes start on straights"
            )));
        }
    }

    let episodes: Vec<(usize, usize)> = config.start_tiles.iter().copied().enumerate().collect();
    let results: Vec<Result<RunMetrics>> = if jobs <= 1 || episodes.len() <= 1 {
        episodes
            .iter()
            .map(|&(i, tile)| run_one(&track, config, i, tile))
            .collect()
    } else {
        let workers = jobs.min(episodes.len());
        let mut slots: Vec<Option<Result<RunMetrics>>> = Vec::new();
        slots.resize_with(episodes.len(), || None);
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::scope(|scope| {
            for w in 0..workers {
                let tx = tx.clone();
                let episodes = &episodes;
                let track = &track;
                scope.spawn(move || {
                    for &(i, tile) in episodes.iter().skip(w).step_by(workers) {
                        let result = run_one(track, config, i, tile);
                        tx.send((i, result)).expect("receiver alive");
                    }
                });
            }
            drop(tx);
            for (i, result) in rx {
                slots[i] = Some(result);
            }
        });
        slots.into_iter().map(|s| s.expect("all episodes ran")).collect()
    };

    let mut rows = Vec::with_capacity(results.len());
    for (result, &tile) in results.into_iter().zip(&config.start_tiles) {
        rows.push(EpisodeScore::from_metrics(tile, &result?));
    }
    Ok(ScoreTable { rows })
}

fn run_one(track: &Track, config: &BenchConfig, index: usize, tile: usize) -> Result<RunMetrics> {
    let mut episode = config.episode.clone();
    if let Some(dir) = &episode.dump_dir {
        // One subdirectory per episode so step-numbered dumps never collide.
        episode.dump_dir = Some(dir.join(format!("ep{:02}_tile{:02}", index + 1, tile)));
    }
    run_episode(track, tile, &episode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_config() -> BenchConfig {
        let mut config = BenchConfig::default();
        config.episode.episode_cap = 2.0;
        config
    }

    #[test]
    fn table_has_five_rows_plus_cumulative() {
        let table = run_benchmark(&short_config(), 1).unwrap();
        assert_eq!(table.rows.len(), 5);
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("episode,start_tile,survival_s,tiles\n"));
        assert!(csv.lines().last().unwrap().starts_with("cumulative,,"));
    }

    #[test]
    fn cumulative_equals_column_sums_exactly() {
        let table = run_benchmark(&short_config(), 1).unwrap();
        let survival: u32 = table.rows.iter().map(|r| r.survival_ds).sum();
        let tiles: u32 = table.rows.iter().map(|r| r.tiles).sum();
        assert_eq!(table.cumulative_survival_ds(), survival);
        assert_eq!(table.cumulative_tiles(), tiles);
    }

    #[test]
    fn reordering_start_tiles_preserves_cumulative_values() {
        let mut reordered = short_config();
        reordered.start_tiles = vec![16, 2, 13, 6, 10];
        let a = run_benchmark(&short_config(), 1).unwrap();
        let b = run_benchmark(&reordered, 1).unwrap();
        assert_eq!(a.cumulative_survival_ds(), b.cumulative_survival_ds());
        assert_eq!(a.cumulative_tiles(), b.cumulative_tiles());
    }

    #[test]
    fn duplicate_start_tiles_fail_before_running() {
        let mut config = short_config();
        config.start_tiles = vec![2, 2];
        assert!(matches!(run_benchmark(&config, 1), Err(Error::Config(_))));
    }

    #[test]
    fn curve_start_tile_is_rejected() {
        let mut config = short_config();
        config.start_tiles = vec![0];
        assert!(matches!(run_benchmark(&config, 1), Err(Error::Config(_))));
    }

    #[test]
    fn parallel_jobs_match_sequential_results() {
        let config = short_config();
        let seq = run_benchmark(&config, 1).unwrap();
        let par = run_benchmark(&config, 3).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn decisecond_formatting() {
        assert_eq!(format_ds(374), "37.4");
        assert_eq!(format_ds(600), "60.0");
        assert_eq!(format_ds(0), "0.0");
    }
}
