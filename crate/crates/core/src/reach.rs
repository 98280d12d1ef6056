//! Where a user can be steered to in a fixed time after a reset.
//!
//! After a reset the user may face any direction, so the reachable set is an
//! annulus around the current position. Displacements between the near and
//! far radii are reached on a straight line by choosing the translation gain;
//! shorter ones down to the inner radius are reached at the largest
//! translation gain by bending the path with a suitable curvature radius.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaincurve::{candidate_alphas, GainBounds, RedirectionCommand};
use crate::geom::{path_blocked, segment_blocked, Chirality, Curvature, PhysEnv, Point2, Pose};
use crate::skeleton::SkeletonGrid;

/// Largest curvature radius the solver will return (m).
pub const RADIUS_CAP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachAnnulus {
    pub s_min: f64,
    pub s_near: f64,
    pub s_max: f64,
}

impl ReachAnnulus {
    pub fn contains(&self, s: f64) -> bool {
        s >= self.s_min && s <= self.s_max
    }
}

/// How the curvature radius for short displacements is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum RadiusSearch {
    /// Exact root of the chord equation; arrival happens exactly on budget.
    #[default]
    Continuous,
    /// Closest radius among the `k` candidate radii; arrival time is approximate.
    Discrete { k: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachPlan {
    pub target: Point2,
    pub command: RedirectionCommand,
    pub arrival_time: f64,
}

/// Chord of an arc of length `arc` on a circle of radius `r`, with the arc
/// capped at one full turn.
fn chord(r: f64, arc: f64) -> f64 {
    2.0 * r * (0.5 * arc / r).min(PI).sin()
}

/// Inner, near and far reach radii for a time budget `t`.
pub fn annulus(t: f64, v: f64, bounds: &GainBounds) -> ReachAnnulus {
    let t = t.max(0.0);
    let s_near = v * t / bounds.g_t_max;
    ReachAnnulus {
        s_min: chord(bounds.r_min, s_near).max(0.0),
        s_near,
        s_max: v * t / bounds.g_t_min,
    }
}

/// Curvature radius whose arc of length `S_near(t)` has chord `s`.
pub fn solve_radius(s: f64, t: f64, v: f64, bounds: &GainBounds) -> Result<f64> {
    let ann = annulus(t, v, bounds);
    if !(s >= ann.s_min && s < ann.s_near) {
        return Err(Error::OutOfDomain {
            s,
            lo: ann.s_min,
            hi: ann.s_near,
        });
    }
    let arc = ann.s_near;
    // below arc / (2 pi) the arc wraps past a full circle
    let mut lo = bounds.r_min.max(arc / (2.0 * PI));
    let mut hi = RADIUS_CAP;
    if chord(lo, arc) >= s {
        return Ok(lo);
    }
    if chord(hi, arc) < s {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chord(mid, arc) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if s - chord(lo, arc) < chord(hi, arc) - s {
        lo
    } else {
        hi
    })
}

/// Distinct candidate radii `|alpha_i| * r_min`, ascending.
fn discrete_radii(k: usize, bounds: &GainBounds) -> Vec<f64> {
    candidate_alphas(k)
        .into_iter()
        .step_by(2)
        .map(|a| a.abs() * bounds.r_min)
        .collect()
}

/// Plans a reset heading plus gains that put the user at `q` after `t` seconds.
pub fn plan_to(
    p: Point2,
    q: Point2,
    t: f64,
    v: f64,
    env: &PhysEnv,
    bounds: &GainBounds,
    search: RadiusSearch,
) -> Option<ReachPlan> {
    if !(t > 0.0) || !(v > 0.0) {
        return None;
    }
    let s = p.dist(q);
    let ann = annulus(t, v, bounds);
    let tol = 1e-12 * ann.s_max.max(1.0);
    let bearing = (q - p).angle();

    if s >= ann.s_near - tol && s <= ann.s_max + tol {
        if segment_blocked(p, q, env) {
            return None;
        }
        let g_t = (v * t / s).clamp(bounds.g_t_min, bounds.g_t_max);
        return Some(ReachPlan {
            target: q,
            command: RedirectionCommand::reset(bearing, Curvature::Straight, g_t),
            arrival_time: t,
        });
    }
    if s < ann.s_min - tol || s >= ann.s_near {
        return None;
    }

    match search {
        RadiusSearch::Continuous => {
            let radius = solve_radius(s.max(ann.s_min), t, v, bounds).ok()?;
            let sweep = ann.s_near / radius;
            for chi in [Chirality::Left, Chirality::Right] {
                let heading = bearing - chi.sign() * 0.5 * sweep;
                let curvature = Curvature::Arc(chi.sign() * radius);
                if !path_blocked(&Pose::new(p, heading), curvature, ann.s_near, env) {
                    return Some(ReachPlan {
                        target: q,
                        command: RedirectionCommand::reset(heading, curvature, bounds.g_t_max),
                        arrival_time: t,
                    });
                }
            }
            None
        }
        RadiusSearch::Discrete { k } => {
            let radii = discrete_radii(k, bounds);
            // chord at fixed arc length grows with the radius
            let idx = radii.partition_point(|&r| chord(r, ann.s_near) < s);
            let pick = [idx.checked_sub(1), Some(idx)]
                .into_iter()
                .flatten()
                .filter(|&i| i < radii.len())
                .min_by(|&a, &b| {
                    let da = (chord(radii[a], ann.s_near) - s).abs();
                    let db = (chord(radii[b], ann.s_near) - s).abs();
                    da.total_cmp(&db)
                })?;
            let radius = radii[pick];
            if s > 2.0 * radius {
                return None;
            }
            let sweep = 2.0 * (s / (2.0 * radius)).min(1.0).asin();
            let arc = radius * sweep;
            let g_t = (v * t / arc).clamp(bounds.g_t_min, bounds.g_t_max);
            for chi in [Chirality::Left, Chirality::Right] {
                let heading = bearing - chi.sign() * 0.5 * sweep;
                let curvature = Curvature::Arc(chi.sign() * radius);
                if !path_blocked(&Pose::new(p, heading), curvature, arc, env) {
                    return Some(ReachPlan {
                        target: q,
                        command: RedirectionCommand::reset(heading, curvature, g_t),
                        arrival_time: arc * g_t / v,
                    });
                }
            }
            None
        }
    }
}

/// A skeleton position reachable on budget, with the plan that gets there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReachableCell {
    pub index: usize,
    pub position: Point2,
    pub plan: ReachPlan,
}

/// Every skeleton position that [`plan_to`] reaches from `p` in `t` seconds.
pub fn reachable_skeleton_positions(
    p: Point2,
    t: f64,
    v: f64,
    env: &PhysEnv,
    grid: &SkeletonGrid,
    bounds: &GainBounds,
    search: RadiusSearch,
) -> Vec<ReachableCell> {
    if !(t > 0.0) {
        return Vec::new();
    }
    let ann = annulus(t, v, bounds);
    let tol = 1e-12 * ann.s_max.max(1.0);
    grid.positions()
        .iter()
        .enumerate()
        .filter(|(_, q)| {
            let s = p.dist(**q);
            s >= ann.s_min - tol && s <= ann.s_max + tol
        })
        .filter_map(|(index, &q)| {
            plan_to(p, q, t, v, env, bounds, search).map(|plan| ReachableCell {
                index,
                position: q,
                plan,
            })
        })
        .collect()
}
