//! Reset and steering decisions.
//!
//! [`Planner`] is the coordinated controller: it classifies users by how long
//! they can walk versus how long they still need, schedules the next common
//! reset around the most constrained user, and sends everyone else to the
//! best skeleton position they can reach by then. The [`baseline`] module
//! holds the steering baselines and their gradient reset.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaincurve::{candidate_paths, CurvatureCandidate, GainBounds, RedirectionCommand};
use crate::geom::{Curvature, PhysEnv, Point2, Pose};
use crate::horizon::skeleton_orientations;
use crate::reach::RadiusSearch;
use crate::skeleton::{SkeletonGrid, SkeletonParams};

pub mod baseline;
mod ours;

pub use baseline::{baseline_step, r2g_reset_heading, Baseline, BaselineMemory, BaselineParams};
pub use ours::{assign_roles, Assignment, Schedule};

/// Controller selected for a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ours,
    S2c,
    S2o,
    Zigzag,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ours, Method::S2c, Method::S2o, Method::Zigzag];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ours => "ours",
            Method::S2c => "s2c",
            Method::S2o => "s2o",
            Method::Zigzag => "zigzag",
        }
    }

    pub fn baseline(self) -> Option<Baseline> {
        match self {
            Method::Ours => None,
            Method::S2c => Some(Baseline::S2c),
            Method::S2o => Some(Baseline::S2o),
            Method::Zigzag => Some(Baseline::Zigzag),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method '{s}'; supported methods: ours, s2c, s2o, zigzag"
                ))
            })
    }
}

/// Snapshot of one user handed to the planner.
#[derive(Clone, Copy, Debug)]
pub struct UserPlanInput<'a> {
    pub id: usize,
    pub physical: Pose,
    pub virtual_position: Point2,
    pub virtual_heading: f64,
    pub target: Point2,
    /// Walking speed (m/s).
    pub speed: f64,
    pub env: &'a PhysEnv,
    pub grid: &'a SkeletonGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SafetyClass {
    Safe,
    Unsafe,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserAnalysis {
    /// Virtual time left to the current target (s).
    pub tau: f64,
    /// Longest walking time over the skeleton orientations (s, may be infinite).
    pub pi: f64,
    pub best_reset_heading: f64,
    /// Candidate that realizes `pi` from `best_reset_heading`.
    pub best_curvature: Curvature,
    pub safety_class: SafetyClass,
}

impl UserAnalysis {
    /// Reset to the best heading and walk the longest candidate at full gain.
    pub fn longest_walk(&self, bounds: &GainBounds) -> RedirectionCommand {
        RedirectionCommand::reset(self.best_reset_heading, self.best_curvature, bounds.g_t_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    WalkLongest,
    GotoMaxL,
    GotoMaxH,
    FallbackLongest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserDecision {
    pub id: usize,
    pub role: Role,
    pub command: RedirectionCommand,
    /// Time budget the role was planned for (s).
    pub budget: f64,
    /// Skeleton position index and location for the GOTO roles.
    pub destination: Option<(usize, Point2)>,
    pub analysis: UserAnalysis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommonResetPlan {
    pub bottleneck: Option<usize>,
    /// Walking time of the bottleneck user; infinite without one.
    pub bottleneck_time: f64,
    /// One entry per input user, in input order.
    pub decisions: Vec<UserDecision>,
}

impl CommonResetPlan {
    pub fn decision(&self, id: usize) -> Option<&UserDecision> {
        self.decisions.iter().find(|d| d.id == id)
    }
}

/// The coordinated reset planner.
#[derive(Clone, Debug)]
pub struct Planner {
    bounds: GainBounds,
    candidates: Vec<CurvatureCandidate>,
    orientations: Vec<f64>,
    search: RadiusSearch,
}

impl Planner {
    pub fn new(bounds: GainBounds, k: usize, lambda: usize, search: RadiusSearch) -> Result<Self> {
        bounds.check()?;
        if k == 0 || lambda == 0 {
            return Err(Error::Config(format!(
                "planner needs k >= 1 and lambda >= 1, got k={k} lambda={lambda}"
            )));
        }
        Ok(Self {
            bounds,
            candidates: candidate_paths(k, &bounds),
            orientations: skeleton_orientations(lambda),
            search,
        })
    }

    pub fn from_skeleton(params: &SkeletonParams, search: RadiusSearch) -> Result<Self> {
        Self::new(params.bounds, params.k, params.lambda, search)
    }

    pub fn bounds(&self) -> &GainBounds {
        &self.bounds
    }

    pub fn candidates(&self) -> &[CurvatureCandidate] {
        &self.candidates
    }

    pub fn orientations(&self) -> &[f64] {
        &self.orientations
    }

    pub fn radius_search(&self) -> RadiusSearch {
        self.search
    }
}
