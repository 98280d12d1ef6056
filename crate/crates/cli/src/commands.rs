//! The four subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rdw_core::geom::PhysEnv;
use rdw_core::sim::{GridCache, TrialConfig};
use rdw_core::skeleton::{SkeletonGrid, SkeletonParams};

use crate::experiment::{self, Batch, ExperimentSpec};
use crate::summary::{summarize, SummaryReport};
use crate::table::{self, TrialRow};
use crate::{plot, CliError, CliResult};

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub struct PrecomputeArgs {
    pub env: PathBuf,
    pub params: SkeletonParams,
    pub clearance: Option<f64>,
    /// Output file; defaults to the standard cache name inside `cache_dir`.
    pub out: Option<PathBuf>,
    pub cache_dir: PathBuf,
}

/// Builds a skeleton grid and writes it to disk. Returns the file written.
pub fn precompute(args: &PrecomputeArgs) -> CliResult<PathBuf> {
    let mut env = PhysEnv::load(&args.env)?;
    if let Some(c) = args.clearance {
        env = env.with_clearance(c)?;
    }
    let clock = Instant::now();
    let grid = SkeletonGrid::build(&env, &args.params)?;
    let elapsed = clock.elapsed().as_secs_f64();
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| args.cache_dir.join(SkeletonGrid::cache_file_name(&env, &args.params)));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
    }
    grid.save(&path).map_err(|e| CliError::runtime(e.to_string()))?;
    println!(
        "{}: {} positions x {} orientations in {elapsed:.2} s",
        path.display(),
        grid.len(),
        grid.orientations().len()
    );
    Ok(path)
}

pub struct RunArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub trials: usize,
    /// CSV file to append to; standard output when absent.
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

/// Runs `trials` seeds of one trial config.
pub fn run(args: &RunArgs) -> CliResult<Vec<TrialRow>> {
    if args.trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let cfg = TrialConfig::load(&args.config)?;
    let setup = cfg.prepare_with(&mut GridCache::default())?;
    let first = args.seed.unwrap_or(cfg.seed);
    let label = args
        .config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trial".into())
        .replace('#', "_");
    let batch = Batch {
        label,
        setup,
        seeds: (0..args.trials as u64).map(|i| first + i).collect(),
    };
    let rows = experiment::run_batches(std::slice::from_ref(&batch), args.jobs)?;
    match &args.out {
        Some(p) => table::append_csv(p, &rows)?,
        None => std::io::stdout().write_all(&table::to_csv(&rows, true)?)?,
    }
    Ok(rows)
}

pub struct CompareArgs {
    pub spec: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Runs an experiment matrix, writing the trial table and the summary.
pub fn compare(args: &CompareArgs) -> CliResult<(Vec<TrialRow>, SummaryReport)> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Some(s) = args.seed {
        spec.base_seed = s;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(o) = &args.out {
        spec.out_dir = o.clone();
    }
    if let Some(j) = args.jobs {
        spec.jobs = j;
    }
    let batches = experiment::prepare(&spec)?;
    let rows = experiment::run_batches(&batches, spec.jobs)?;
    let report = summarize(&spec.name, &rows);
    write_file(&spec.out_dir.join(TRIALS_FILE), &table::to_csv(&rows, true)?)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::runtime(e.to_string()))?;
    write_file(&spec.out_dir.join(SUMMARY_FILE), format!("{json}\n").as_bytes())?;
    let failed = rows.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        eprintln!("{failed} of {} trials failed; see the status column", rows.len());
    }
    Ok((rows, report))
}

pub fn print_summary(report: &SummaryReport) {
    for c in &report.configs {
        println!("{} ({} users)", c.config, c.n_users);
        for m in &c.methods {
            match m.resets {
                Some(s) => println!(
                    "  {:<8} n={:<4} mean={:<8.2} median={:<7.1} q1={:<7.1} q3={:<7.1} failed={}",
                    m.method, m.n, s.mean, s.median, s.q1, s.q3, m.failed
                ),
                None => println!("  {:<8} n=0 failed={}", m.method, m.failed),
            }
        }
        for t in &c.comparisons {
            println!(
                "  {} vs {}: U={} p={:.3e} adjusted={:.3e}",
                report.reference, t.method, t.u_reference, t.p_two_sided, t.p_adjusted
            );
        }
    }
}

pub struct ReportArgs {
    pub csv: PathBuf,
    pub out: PathBuf,
    /// Environments to draw escapability and safety maps for.
    pub envs: Vec<PathBuf>,
    pub params: SkeletonParams,
    pub cache_dir: Option<PathBuf>,
}

/// Writes one box plot per config and optional field heatmaps. Returns the
/// files written.
pub fn report(args: &ReportArgs) -> CliResult<Vec<PathBuf>> {
    let rows = table::read_csv(&args.csv)?;
    let mut written = Vec::new();
    let summary = summarize("report", &rows);
    for c in &summary.configs {
        let boxes: Vec<_> = c
            .methods
            .iter()
            .filter_map(|m| m.resets.map(|s| (m.method.clone(), s)))
            .collect();
        let title = format!("{} ({} users)", c.config, c.n_users);
        let path = args.out.join(format!("boxplot_{}.svg", file_safe(&c.config)));
        write_file(&path, plot::box_plot(&title, &boxes).as_bytes())?;
        written.push(path);
    }
    for env_path in &args.envs {
        let env = PhysEnv::load(env_path)?;
        let grid = match &args.cache_dir {
            Some(d) => SkeletonGrid::load_or_build(
                &d.join(SkeletonGrid::cache_file_name(&env, &args.params)),
                &env,
                &args.params,
            )?,
            None => SkeletonGrid::build(&env, &args.params)?,
        };
        let stem = file_safe(&env_path.file_stem().unwrap_or_default().to_string_lossy());
        for (tag, label, field) in [
            ("L", "escapability", grid.escapability_field()),
            ("H", "safety", grid.safety_field()),
        ] {
            let path = args.out.join(format!("heatmap_{stem}_{tag}.svg"));
            let title = format!("{stem}: {label} {tag} (s at 1 m/s)");
            write_file(&path, plot::heatmap(&title, &env, &grid, field).as_bytes())?;
            written.push(path);
        }
    }
    for p in &written {
        println!("{}", p.display());
    }
    Ok(written)
}
