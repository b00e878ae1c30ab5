use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lane_pilot::bench::{process_frames, profile_pipeline, run_benchmark, BenchConfig};
use lane_pilot::Error;

/// Lane following on classical vision, benchmarked in a closed-loop
/// 2D simulator.
#[derive(Parser)]
#[command(name = "lane-pilot", version, about)]
struct Cli {
    /// Reserved for future stochastic features; the pipeline is
    /// deterministic and ignores it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override single config keys, e.g. `--set frame_delay=6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<BenchConfig, Error> {
        let mut config = match &self.config {
            Some(path) => BenchConfig::load(path)?,
            None => BenchConfig::default(),
        };
        for item in &self.overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{item}`")))?;
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the 5-episode benchmark and write the score table.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output CSV path (overrides the config's `out_csv`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump per-step frames and overlays under this directory.
        #[arg(long)]
        dump_frames: Option<PathBuf>,
        /// Parallel episode workers.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Process a directory of PPM/PGM frames offline.
    Process {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory of input frames, processed in filename order.
        #[arg(long)]
        input: PathBuf,
        /// Angle log output path.
        #[arg(long)]
        log: PathBuf,
        /// When set, write one overlay image per valid frame here.
        #[arg(long)]
        overlays: Option<PathBuf>,
    },
    /// Time the perception + control step and report frames/second.
    Profile {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
    },
    /// Print the effective configuration in reparseable form.
    DumpConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run {
            config,
            out,
            dump_frames,
            jobs,
        } => {
            let mut config = config.load()?;
            if let Some(out) = out {
                config.out_csv = out;
            }
            if let Some(dir) = dump_frames {
                config.episode.dump_dir = Some(dir);
            }
            let table = run_benchmark(&config, jobs.max(1))?;
            let csv = table.to_csv();
            print!("{csv}");
            if let Some(parent) = config.out_csv.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&config.out_csv, csv)?;
            eprintln!(
                "cumulative score {} across {} episodes -> {}",
                table.cumulative_label(),
                table.rows.len(),
                config.out_csv.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Process {
            config,
            input,
            log,
            overlays,
        } => {
            let config = config.load()?;
            let summary = process_frames(&input, &config, &log, overlays.as_deref())?;
            eprintln!(
                "processed {} frame(s), {} failure(s)",
                summary.frames, summary.failures
            );
            if summary.failures > 0 {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Profile { config, iterations } => {
            let config = config.load()?;
            let report = profile_pipeline(&config, iterations)?;
            println!("{report}");
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpConfig { config } => {
            let config = config.load()?;
            print!("{}", config.dump());
            Ok(ExitCode::SUCCESS)
        }
    }
}
