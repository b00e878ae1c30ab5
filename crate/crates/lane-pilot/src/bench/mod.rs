//! Benchmark protocol, offline frame processing, profiling and the flat
//! `key = value` configuration behind the CLI.

mod config;
mod process;
mod profile;
mod runner;

pub use config::BenchConfig;
pub use process::{process_frames, ProcessSummary};
pub use profile::{profile_pipeline, ProfileReport, StageStat};
pub use runner::{run_benchmark, EpisodeScore, ScoreTable};
