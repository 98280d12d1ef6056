//! Experiment matrices: methods x room combinations x user counts x seeds.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rdw_core::controller::Method;
use rdw_core::sim::{run_setup, GridCache, TrialConfig, TrialSetup};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::table::TrialRow;
use crate::{CliError, CliResult};

/// Room combination; users take the listed environments in turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSet {
    pub name: String,
    pub envs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub methods: Vec<Method>,
    pub configs: Vec<RoomSet>,
    /// Defaults to one user per listed environment.
    #[serde(default)]
    pub user_counts: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub jobs: usize,
    /// Trial config fields applied to every run.
    #[serde(default)]
    pub trial: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

const RESERVED: [&str; 4] = ["method", "users", "seed", "cache_dir"];

/// One row of the matrix: a named room set at a fixed user count.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    pub name: String,
    pub n_users: usize,
    pub envs: Vec<PathBuf>,
    pub clearance: Option<f64>,
}

impl ExperimentSpec {
    /// Parses a spec; relative paths are taken from the spec's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let mut spec: ExperimentSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for c in &mut spec.configs {
            c.envs.iter_mut().for_each(fix);
        }
        fix(&mut spec.out_dir);
        if let Some(c) = &mut spec.cache_dir {
            fix(c);
        }
        Ok(spec)
    }

    pub fn check(&self) -> CliResult<()> {
        if self.methods.is_empty() {
            return Err(CliError::usage(format!(
                "experiment '{}' lists no methods; supported methods: {}",
                self.name,
                Method::ALL.map(|m| m.name()).join(", ")
            )));
        }
        if self.trials == 0 {
            return Err(CliError::usage("trials must be at least 1"));
        }
        if self.configs.is_empty() {
            return Err(CliError::usage("experiment lists no configs"));
        }
        for c in &self.configs {
            if c.envs.is_empty() {
                return Err(CliError::usage(format!("config '{}' lists no envs", c.name)));
            }
            if c.name.contains('#') {
                return Err(CliError::usage(format!("config name '{}' may not contain '#'", c.name)));
            }
        }
        if self.user_counts.contains(&0) {
            return Err(CliError::usage("user counts must be at least 1"));
        }
        if let Some(k) = RESERVED.iter().find(|k| self.trial.contains_key(**k)) {
            return Err(CliError::usage(format!(
                "'trial' may not set '{k}'; it is filled in per run"
            )));
        }
        Ok(())
    }

    pub fn groups(&self) -> Vec<Group> {
        let mut out = Vec::new();
        for c in &self.configs {
            let counts = if self.user_counts.is_empty() {
                vec![c.envs.len()]
            } else {
                self.user_counts.clone()
            };
            for n in counts {
                out.push(Group {
                    name: format!("{}-{n}u", c.name),
                    n_users: n,
                    envs: (0..n).map(|i| c.envs[i % c.envs.len()].clone()).collect(),
                    clearance: c.clearance,
                });
            }
        }
        out
    }

    /// Trial config for one group and method, with the spec's overrides.
    pub fn trial_config(&self, group: &Group, method: Method) -> CliResult<TrialConfig> {
        let users: Vec<Value> = group
            .envs
            .iter()
            .map(|e| {
                let mut u = Map::new();
                u.insert("env".into(), Value::String(e.to_string_lossy().into_owned()));
                if let Some(c) = group.clearance {
                    u.insert("clearance".into(), Value::from(c));
                }
                Value::Object(u)
            })
            .collect();
        let mut doc = self.trial.clone();
        doc.insert("method".into(), Value::String(method.name().into()));
        doc.insert("users".into(), Value::Array(users));
        let mut cfg: TrialConfig = serde_json::from_value(Value::Object(doc))
            .map_err(|e| CliError::usage(format!("experiment '{}': trial settings: {e}", self.name)))?;
        cfg.cache_dir = self.cache_dir.clone();
        Ok(cfg)
    }
}

/// A prepared family of trials sharing everything but the seed.
pub struct Batch {
    pub label: String,
    pub setup: TrialSetup,
    pub seeds: Vec<u64>,
}

/// Runs every batch on a pool of `jobs` threads (0 for all cores). Rows come
/// back in batch order, then seed order, whatever the scheduling.
pub fn run_batches(batches: &[Batch], jobs: usize) -> CliResult<Vec<TrialRow>> {
    let tasks: Vec<(usize, usize)> = batches
        .iter()
        .enumerate()
        .flat_map(|(b, batch)| (0..batch.seeds.len()).map(move |i| (b, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let rows = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(b, i)| {
                let batch = &batches[b];
                let seed = batch.seeds[i];
                let id = format!("{}#{i}", batch.label);
                let n = batch.setup.users.len();
                match run_setup(&batch.setup, seed) {
                    Ok(stats) => TrialRow::from_stats(id, n, &stats),
                    Err(e) => TrialRow::failed(id, batch.setup.method.name(), seed, n, &e),
                }
            })
            .collect()
    });
    Ok(rows)
}

/// Prepares every (group, method) pair, sharing loaded rooms and grids.
pub fn prepare(spec: &ExperimentSpec) -> CliResult<Vec<Batch>> {
    spec.check()?;
    let mut cache = GridCache::default();
    let seeds: Vec<u64> = (0..spec.trials as u64).map(|i| spec.base_seed + i).collect();
    let mut out = Vec::new();
    for g in spec.groups() {
        for &m in &spec.methods {
            let cfg = spec.trial_config(&g, m)?;
            out.push(Batch {
                label: g.name.clone(),
                setup: cfg.prepare_with(&mut cache)?,
                seeds: seeds.clone(),
            });
        }
    }
    Ok(out)
}
