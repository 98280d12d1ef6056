//! Precomputed walking-time field over discrete poses of a room.
//!
//! Grid-square centers that lie in free space are the skeleton positions;
//! each is paired with `lambda` evenly spaced orientations. For every position
//! we keep the best walking time over orientations (escapability) and their
//! harmonic mean (safety). Times are stored for a walking speed of 1 m/s and
//! rescaled by callers, since every time scales with `1 / v`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaincurve::{candidate_paths, GainBounds};
use crate::geom::{PhysEnv, Point2, Pose, Vec2};
use crate::horizon::{skeleton_orientations, walk_times};

const FORMAT: &str = "rdw-skeleton/1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonParams {
    /// Grid spacing (m).
    pub delta: f64,
    /// Number of orientations per position.
    pub lambda: usize,
    /// Candidate pairs per side.
    pub k: usize,
    pub bounds: GainBounds,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        Self {
            delta: 0.5,
            lambda: 30,
            k: 10,
            bounds: GainBounds::default(),
        }
    }
}

impl SkeletonParams {
    pub fn check(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) || self.lambda == 0 || self.k == 0 {
            return Err(Error::Config(format!(
                "skeleton parameters need delta > 0, lambda >= 1, k >= 1, got {self:?}"
            )));
        }
        self.bounds.check()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonGrid {
    params: SkeletonParams,
    env_hash: String,
    origin: Point2,
    nx: usize,
    ny: usize,
    cells: Vec<[usize; 2]>,
    positions: Vec<Point2>,
    orientations: Vec<f64>,
    /// Row-major `positions x orientations`, seconds at 1 m/s.
    t_max: Vec<f64>,
    escapability: Vec<f64>,
    safety: Vec<f64>,
}

fn harmonic_mean(values: &[f64]) -> f64 {
    let inv: f64 = values.iter().map(|t| 1.0 / t).sum();
    values.len() as f64 / inv
}

impl SkeletonGrid {
    /// Builds the table using all available threads.
    pub fn build(env: &PhysEnv, params: &SkeletonParams) -> Result<Self> {
        Self::build_impl(env, params, true)
    }

    /// Single-threaded build; output is identical to [`SkeletonGrid::build`].
    pub fn build_serial(env: &PhysEnv, params: &SkeletonParams) -> Result<Self> {
        Self::build_impl(env, params, false)
    }

    fn build_impl(env: &PhysEnv, params: &SkeletonParams, parallel: bool) -> Result<Self> {
        params.check()?;
        let (lo, hi) = env.bounds();
        let span = hi - lo;
        let nx = ((span.x / params.delta) - 1e-9).ceil().max(1.0) as usize;
        let ny = ((span.y / params.delta) - 1e-9).ceil().max(1.0) as usize;
        let mut cells = Vec::new();
        let mut positions = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let c = lo + Vec2::new((i as f64 + 0.5) * params.delta, (j as f64 + 0.5) * params.delta);
                if env.contains(c) {
                    cells.push([i, j]);
                    positions.push(c);
                }
            }
        }
        if positions.is_empty() {
            return Err(Error::EmptyFreeSpace);
        }
        let orientations = skeleton_orientations(params.lambda);
        let candidates = candidate_paths(params.k, &params.bounds);
        let row = |p: &Point2| -> Result<Vec<f64>> {
            orientations
                .iter()
                .map(|&th| {
                    walk_times(&Pose::new(*p, th), 1.0, env, &candidates, &params.bounds).map(|r| r.t_max)
                })
                .collect()
        };
        let rows: Vec<Vec<f64>> = if parallel {
            positions.par_iter().map(row).collect::<Result<_>>()?
        } else {
            positions.iter().map(row).collect::<Result<_>>()?
        };
        let escapability = rows
            .iter()
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let safety = rows.iter().map(|r| harmonic_mean(r)).collect();
        Ok(Self {
            params: *params,
            env_hash: env.content_hash(),
            origin: lo,
            nx,
            ny,
            cells,
            positions,
            orientations,
            t_max: rows.into_iter().flatten().collect(),
            escapability,
            safety,
        })
    }

    pub fn params(&self) -> &SkeletonParams {
        &self.params
    }

    pub fn env_hash(&self) -> &str {
        &self.env_hash
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn orientations(&self) -> &[f64] {
        &self.orientations
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `(column, row)` of a position in the full bounding-box grid.
    pub fn cell(&self, index: usize) -> [usize; 2] {
        self.cells[index]
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    /// Walking time at 1 m/s for a position/orientation pair.
    pub fn t_max(&self, position: usize, orientation: usize) -> f64 {
        self.t_max[position * self.orientations.len() + orientation]
    }

    pub fn t_max_row(&self, position: usize) -> &[f64] {
        let l = self.orientations.len();
        &self.t_max[position * l..(position + 1) * l]
    }

    /// Escapability at 1 m/s.
    pub fn escapability(&self, position: usize) -> f64 {
        self.escapability[position]
    }

    /// Safety at 1 m/s.
    pub fn safety(&self, position: usize) -> f64 {
        self.safety[position]
    }

    pub fn escapability_field(&self) -> &[f64] {
        &self.escapability
    }

    pub fn safety_field(&self) -> &[f64] {
        &self.safety
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&CacheDoc::from_grid(self))
            .map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Loads a cache, refusing it unless it was built for this exact
    /// environment and parameter set.
    pub fn load(path: &Path, env: &PhysEnv, params: &SkeletonParams) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let doc: CacheDoc = serde_json::from_str(&text)
            .map_err(|e| Error::StaleCache(format!("{}: unreadable cache: {e}", path.display())))?;
        if doc.format != FORMAT {
            return Err(Error::StaleCache(format!("unknown format {:?}", doc.format)));
        }
        let hash = env.content_hash();
        if doc.env_hash != hash {
            return Err(Error::StaleCache(format!(
                "environment hash {} does not match {}",
                doc.env_hash, hash
            )));
        }
        if doc.params != *params {
            return Err(Error::StaleCache(format!(
                "parameters {:?} do not match {:?}",
                doc.params, params
            )));
        }
        doc.into_grid()
    }

    /// Loads a matching cache from `path`, or builds and writes one.
    pub fn load_or_build(path: &Path, env: &PhysEnv, params: &SkeletonParams) -> Result<Self> {
        match Self::load(path, env, params) {
            Ok(g) => Ok(g),
            Err(Error::StaleCache(_)) | Err(Error::Io(_)) => {
                let g = Self::build(env, params)?;
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir).map_err(|e| Error::Io(e.to_string()))?;
                }
                g.save(path)?;
                Ok(g)
            }
            Err(e) => Err(e),
        }
    }

    /// File name that identifies this environment/parameter combination.
    pub fn cache_file_name(env: &PhysEnv, params: &SkeletonParams) -> String {
        let fp = serde_json::to_string(params).unwrap_or_default();
        let mut h = sha2_hex(fp.as_bytes());
        h.truncate(12);
        format!("skeleton-{}-{}.json", &env.content_hash()[..16], h)
    }
}

fn sha2_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Infinite times are written as `null`.
#[derive(Serialize, Deserialize)]
struct CacheDoc {
    format: String,
    env_hash: String,
    params: SkeletonParams,
    time_unit: String,
    origin: [f64; 2],
    nx: usize,
    ny: usize,
    cells: Vec<[usize; 2]>,
    positions: Vec<[f64; 2]>,
    orientations: Vec<f64>,
    t_max: Vec<Option<f64>>,
    escapability: Vec<Option<f64>>,
    safety: Vec<Option<f64>>,
}

fn enc(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|&t| (t.is_finite()).then_some(t)).collect()
}

fn dec(v: Vec<Option<f64>>) -> Vec<f64> {
    v.into_iter().map(|t| t.unwrap_or(f64::INFINITY)).collect()
}

impl CacheDoc {
    fn from_grid(g: &SkeletonGrid) -> Self {
        Self {
            format: FORMAT.into(),
            env_hash: g.env_hash.clone(),
            params: g.params,
            time_unit: "seconds at 1 m/s; divide by the walking speed".into(),
            origin: [g.origin.x, g.origin.y],
            nx: g.nx,
            ny: g.ny,
            cells: g.cells.clone(),
            positions: g.positions.iter().map(|p| [p.x, p.y]).collect(),
            orientations: g.orientations.clone(),
            t_max: enc(&g.t_max),
            escapability: enc(&g.escapability),
            safety: enc(&g.safety),
        }
    }

    fn into_grid(self) -> Result<SkeletonGrid> {
        let n = self.positions.len();
        let l = self.orientations.len();
        if self.cells.len() != n
            || self.t_max.len() != n * l
            || self.escapability.len() != n
            || self.safety.len() != n
            || l != self.params.lambda
        {
            return Err(Error::StaleCache("table dimensions are inconsistent".into()));
        }
        Ok(SkeletonGrid {
            params: self.params,
            env_hash: self.env_hash,
            origin: Vec2::new(self.origin[0], self.origin[1]),
            nx: self.nx,
            ny: self.ny,
            cells: self.cells,
            positions: self.positions.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
            orientations: self.orientations,
            t_max: dec(self.t_max),
            escapability: dec(self.escapability),
            safety: dec(self.safety),
        })
    }
}
