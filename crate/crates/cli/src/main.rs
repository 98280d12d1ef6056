use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdw_cli::commands::{self, CompareArgs, PrecomputeArgs, ReportArgs, RunArgs};
use rdw_cli::CliResult;
use rdw_core::gaincurve::GainBounds;
use rdw_core::skeleton::SkeletonParams;

#[derive(Parser)]
#[command(name = "rdw", version, about = "Multi-user redirected walking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridFlags {
    /// Grid spacing (m)
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Orientations per position
    #[arg(long, default_value_t = 30)]
    lambda: usize,
    /// Curvature candidates per side
    #[arg(long, default_value_t = 10)]
    k: usize,
}

impl GridFlags {
    fn params(&self) -> SkeletonParams {
        SkeletonParams {
            delta: self.delta,
            lambda: self.lambda,
            k: self.k,
            bounds: GainBounds::default(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and cache the skeleton grid of a room
    Precompute {
        env: PathBuf,
        #[command(flatten)]
        grid: GridFlags,
        /// Override the room's clearance (m)
        #[arg(long)]
        clearance: Option<f64>,
        /// Output file (default: standard name inside --cache-dir)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "cache")]
        cache_dir: PathBuf,
    },
    /// Run trials of one trial config and emit CSV rows
    Run {
        config: PathBuf,
        /// First seed (default: the config's seed)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// CSV file to append to (default: standard output)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, 0 for all cores
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run an experiment matrix and write trials.csv and summary.json
    Compare {
        spec: PathBuf,
        /// Base seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Draw box plots from a trial CSV and optional field heatmaps
    Report {
        csv: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Room to draw escapability and safety heatmaps for (repeatable)
        #[arg(long = "env")]
        envs: Vec<PathBuf>,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Precompute { env, grid, clearance, out, cache_dir } => {
            commands::precompute(&PrecomputeArgs { env, params: grid.params(), clearance, out, cache_dir })?;
        }
        Command::Run { config, seed, trials, out, jobs } => {
            commands::run(&RunArgs { config, seed, trials, out, jobs })?;
        }
        Command::Compare { spec, seed, trials, out, jobs } => {
            let (_, report) = commands::compare(&CompareArgs { spec, seed, trials, out, jobs })?;
            commands::print_summary(&report);
        }
        Command::Report { csv, out, envs, grid, cache_dir } => {
            commands::report(&ReportArgs { csv, out, envs, params: grid.params(), cache_dir })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
