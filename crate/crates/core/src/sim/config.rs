use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::controller::{BaselineParams, Method, Planner};
use crate::error::{Error, Result};
use crate::gaincurve::GainBounds;
use crate::geom::{PhysEnv, Pose, Vec2};
use crate::reach::RadiusSearch;
use crate::skeleton::{SkeletonGrid, SkeletonParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    /// Environment file, relative paths resolved against the config file.
    pub env: PathBuf,
    #[serde(default = "default_speed")]
    pub speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<StartPose>,
    /// Overrides the clearance stored in the environment file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
}

fn default_speed() -> f64 {
    1.0
}

/// Distance range for new virtual targets (m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSampling {
    pub min_distance: f64,
    pub max_distance: f64,
}

impl Default for TargetSampling {
    fn default() -> Self {
        Self {
            min_distance: 2.0,
            max_distance: 6.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkeletonConfig {
    pub delta: f64,
    pub lambda: usize,
    pub k: usize,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        let p = SkeletonParams::default();
        Self {
            delta: p.delta,
            lambda: p.lambda,
            k: p.k,
        }
    }
}

/// One trial (or a family of trials differing only by seed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub method: Method,
    pub users: Vec<UserConfig>,
    #[serde(default)]
    pub seed: u64,
    /// Virtual distance every user must walk before the trial ends (m).
    #[serde(default = "default_threshold")]
    pub distance_threshold: f64,
    /// Controller update interval (s).
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Turning speed in place (rad/s).
    #[serde(default = "default_turn_rate")]
    pub turn_rate: f64,
    #[serde(default)]
    pub target: TargetSampling,
    #[serde(default)]
    pub gains: GainBounds,
    #[serde(default)]
    pub skeleton: SkeletonConfig,
    #[serde(default)]
    pub baseline: BaselineParams,
    #[serde(default)]
    pub radius_search: RadiusSearch,
    /// Directory for skeleton caches; grids are built in memory when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    /// Measure wall-clock time; off by default so outputs stay reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_threshold() -> f64 {
    400.0
}

fn default_dt() -> f64 {
    0.01
}

fn default_turn_rate() -> f64 {
    FRAC_PI_2
}

impl TrialConfig {
    /// Config with defaults for every optional field.
    pub fn new(method: Method, users: Vec<UserConfig>) -> Self {
        Self {
            method,
            users,
            seed: 0,
            distance_threshold: default_threshold(),
            dt: default_dt(),
            turn_rate: default_turn_rate(),
            target: TargetSampling::default(),
            gains: GainBounds::default(),
            skeleton: SkeletonConfig::default(),
            baseline: BaselineParams::default(),
            radius_search: RadiusSearch::default(),
            cache_dir: None,
            record_wall_time: false,
        }
    }

    /// Parses a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: TrialConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for u in &mut self.users {
            if u.env.is_relative() {
                u.env = base.join(&u.env);
            }
        }
        if let Some(c) = &mut self.cache_dir {
            if c.is_relative() {
                *c = base.join(&*c);
            }
        }
    }

    pub fn skeleton_params(&self) -> SkeletonParams {
        SkeletonParams {
            delta: self.skeleton.delta,
            lambda: self.skeleton.lambda,
            k: self.skeleton.k,
            bounds: self.gains,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::Config("trial needs at least one user".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.turn_rate > 0.0 && self.turn_rate.is_finite()) {
            return Err(Error::Config(format!("turn_rate must be positive, got {}", self.turn_rate)));
        }
        if !(self.distance_threshold >= 0.0 && self.distance_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "distance_threshold must be finite and non-negative, got {}",
                self.distance_threshold
            )));
        }
        let t = self.target;
        if !(t.min_distance > 0.0 && t.min_distance <= t.max_distance && t.max_distance.is_finite()) {
            return Err(Error::Config(format!(
                "target distances need 0 < min_distance <= max_distance, got {t:?}"
            )));
        }
        for (i, u) in self.users.iter().enumerate() {
            if !(u.speed > 0.0 && u.speed.is_finite()) {
                return Err(Error::Config(format!("user {i}: speed must be positive, got {}", u.speed)));
            }
        }
        if let RadiusSearch::Discrete { k } = self.radius_search {
            if k == 0 {
                return Err(Error::Config("discrete radius search needs k >= 1".into()));
            }
        }
        self.baseline.check()?;
        self.skeleton_params().check()
    }

    /// Loads environments and builds (or reads cached) skeleton grids.
    pub fn prepare(&self) -> Result<TrialSetup> {
        self.prepare_with(&mut GridCache::default())
    }

    /// Like [`TrialConfig::prepare`], reusing environments and grids across calls.
    pub fn prepare_with(&self, cache: &mut GridCache) -> Result<TrialSetup> {
        self.check()?;
        let params = self.skeleton_params();
        let planner = Planner::from_skeleton(&params, self.radius_search)?;
        let mut users = Vec::with_capacity(self.users.len());
        for u in &self.users {
            let env = cache.env(&u.env, u.clearance)?;
            let grid = if self.method == Method::Ours {
                Some(cache.grid(&env, &params, self.cache_dir.as_deref())?)
            } else {
                None
            };
            let start = u
                .start
                .map(|s| Pose::new(Vec2::new(s.x, s.y), s.heading));
            if let Some(p) = start {
                if !env.contains(p.position) {
                    return Err(Error::PoseOutsideFreeSpace {
                        x: p.position.x,
                        y: p.position.y,
                    });
                }
            }
            users.push(UserSetup {
                env,
                grid,
                speed: u.speed,
                start,
            });
        }
        Ok(TrialSetup {
            method: self.method,
            users,
            planner,
            baseline: self.baseline,
            distance_threshold: self.distance_threshold,
            dt: self.dt,
            turn_rate: self.turn_rate,
            target: self.target,
            record_wall_time: self.record_wall_time,
        })
    }
}

/// Shares loaded environments and skeleton grids between trials.
#[derive(Default)]
pub struct GridCache {
    envs: HashMap<(PathBuf, Option<u64>), Arc<PhysEnv>>,
    grids: HashMap<String, Arc<SkeletonGrid>>,
}

impl GridCache {
    fn env(&mut self, path: &Path, clearance: Option<f64>) -> Result<Arc<PhysEnv>> {
        let key = (path.to_path_buf(), clearance.map(f64::to_bits));
        if let Some(e) = self.envs.get(&key) {
            return Ok(e.clone());
        }
        let mut env = PhysEnv::load(path)?;
        if let Some(c) = clearance {
            env = env.with_clearance(c)?;
        }
        let env = Arc::new(env);
        self.envs.insert(key, env.clone());
        Ok(env)
    }

    fn grid(
        &mut self,
        env: &PhysEnv,
        params: &SkeletonParams,
        dir: Option<&Path>,
    ) -> Result<Arc<SkeletonGrid>> {
        let name = SkeletonGrid::cache_file_name(env, params);
        if let Some(g) = self.grids.get(&name) {
            return Ok(g.clone());
        }
        let grid = match dir {
            Some(d) => SkeletonGrid::load_or_build(&d.join(&name), env, params)?,
            None => SkeletonGrid::build(env, params)?,
        };
        let grid = Arc::new(grid);
        self.grids.insert(name, grid.clone());
        Ok(grid)
    }
}

#[derive(Clone, Debug)]
pub struct UserSetup {
    pub env: Arc<PhysEnv>,
    /// Present for the `ours` method only.
    pub grid: Option<Arc<SkeletonGrid>>,
    pub speed: f64,
    pub start: Option<Pose>,
}

impl UserSetup {
    /// User with the default speed and a random start.
    pub fn new(env: Arc<PhysEnv>, grid: Option<Arc<SkeletonGrid>>) -> Self {
        Self {
            env,
            grid,
            speed: default_speed(),
            start: None,
        }
    }
}

/// Everything a trial needs apart from its seed.
#[derive(Clone, Debug)]
pub struct TrialSetup {
    pub method: Method,
    pub users: Vec<UserSetup>,
    pub planner: Planner,
    pub baseline: BaselineParams,
    pub distance_threshold: f64,
    pub dt: f64,
    pub turn_rate: f64,
    pub target: TargetSampling,
    pub record_wall_time: bool,
}

impl TrialSetup {
    /// Setup with default parameters around already-loaded users.
    pub fn new(method: Method, users: Vec<UserSetup>) -> Result<Self> {
        let params = SkeletonParams::default();
        Ok(Self {
            method,
            users,
            planner: Planner::from_skeleton(&params, RadiusSearch::Continuous)?,
            baseline: BaselineParams::default(),
            distance_threshold: default_threshold(),
            dt: default_dt(),
            turn_rate: default_turn_rate(),
            target: TargetSampling::default(),
            record_wall_time: false,
        })
    }
}
