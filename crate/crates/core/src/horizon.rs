//! Time a user can walk from a pose before leaving free space.
//!
//! The room is scanned with the candidate family of circles tangent to the
//! heading plus the straight ray. Each first-hit length becomes a time at the
//! user's virtual speed, stretched by the largest translation gain.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaincurve::{CurvatureCandidate, GainBounds};
use crate::geom::{first_hit_along, PhysEnv, Point2, Pose};

/// Times closer than this are treated as equal when picking a candidate.
pub const TIME_TIE_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    /// First-hit arc length per candidate (m, may be infinite).
    pub lengths: Vec<f64>,
    /// `length / v` per candidate (s).
    pub times: Vec<f64>,
    /// Largest `time * g_t_max` over the candidates (s).
    pub t_max: f64,
    pub best: CurvatureCandidate,
    best_slot: usize,
    g_t_min: f64,
    g_t_max: f64,
}

impl HorizonReport {
    /// Attainable walking-time interval along candidate `slot`.
    pub fn time_range(&self, slot: usize) -> (f64, f64) {
        let t = self.times[slot];
        (t * self.g_t_min, t * self.g_t_max)
    }

    /// Position of `best` in the candidate list.
    pub fn best_slot(&self) -> usize {
        self.best_slot
    }
}

/// Orientation that maximizes the walking time at a position.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientationBest {
    pub heading: f64,
    pub t_max: f64,
    pub report: HorizonReport,
}

/// `{2 pi i / lambda | i = 1..=lambda}`, wrapped into `[0, 2 pi)`.
pub fn skeleton_orientations(lambda: usize) -> Vec<f64> {
    (1..=lambda)
        .map(|i| TAU * (i % lambda) as f64 / lambda as f64)
        .collect()
}

/// Compares two candidates by gentleness: straight beats any arc, a larger
/// radius factor beats a smaller one, and left beats right.
fn gentler(a: &CurvatureCandidate, b: &CurvatureCandidate) -> Ordering {
    match (a.alpha, b.alpha) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x
            .abs()
            .partial_cmp(&y.abs())
            .unwrap_or(Ordering::Equal)
            .then_with(|| x.signum().partial_cmp(&y.signum()).unwrap_or(Ordering::Equal)),
    }
}

fn time_cmp(a: f64, b: f64) -> Ordering {
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ if (a - b).abs() <= TIME_TIE_EPS => Ordering::Equal,
        _ => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
    }
}

/// Walking-time report over every candidate path from `pose`.
pub fn walk_times(
    pose: &Pose,
    v: f64,
    env: &PhysEnv,
    candidates: &[CurvatureCandidate],
    bounds: &GainBounds,
) -> Result<HorizonReport> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("speed must be positive, got {v}")));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty candidate list".into()));
    }
    if !env.contains(pose.position) {
        return Err(Error::PoseOutsideFreeSpace {
            x: pose.position.x,
            y: pose.position.y,
        });
    }
    let lengths: Vec<f64> = candidates
        .iter()
        .map(|c| first_hit_along(pose, c.curvature, env))
        .collect();
    let times: Vec<f64> = lengths.iter().map(|l| l / v).collect();

    let mut best_slot = 0;
    for slot in 1..candidates.len() {
        let ord = time_cmp(times[slot], times[best_slot])
            .then_with(|| gentler(&candidates[slot], &candidates[best_slot]));
        if ord == Ordering::Greater {
            best_slot = slot;
        }
    }
    Ok(HorizonReport {
        t_max: times[best_slot] * bounds.g_t_max,
        best: candidates[best_slot],
        best_slot,
        lengths,
        times,
        g_t_min: bounds.g_t_min,
        g_t_max: bounds.g_t_max,
    })
}

/// Best heading among `orientations` at `position`; the first one wins ties.
pub fn t_max_over_orientations(
    position: Point2,
    v: f64,
    env: &PhysEnv,
    orientations: &[f64],
    candidates: &[CurvatureCandidate],
    bounds: &GainBounds,
) -> Result<OrientationBest> {
    let mut best: Option<OrientationBest> = None;
    for &theta in orientations {
        let report = walk_times(&Pose::new(position, theta), v, env, candidates, bounds)?;
        let better = match &best {
            None => true,
            Some(b) => report.t_max > b.t_max,
        };
        if better {
            best = Some(OrientationBest {
                heading: crate::geom::normalize_heading(theta),
                t_max: report.t_max,
                report,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("empty orientation list".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaincurve::candidate_paths;
    use crate::geom::{Curvature, Vec2};

    fn setup() -> (PhysEnv, Vec<CurvatureCandidate>, GainBounds) {
        let b = GainBounds::default();
        (PhysEnv::rectangle(5.0, 5.0, 0.0).unwrap(), candidate_paths(10, &b), b)
    }

    #[test]
    fn square_center() {
        let (env, c, b) = setup();
        let r = walk_times(&Pose::new(Vec2::new(0.0, 0.0), 0.0), 1.0, &env, &c, &b).unwrap();
        let l = 7.5 * (1.0f64 / 3.0).asin();
        assert!((r.t_max - l * 1.26).abs() < 1e-12);
        assert!((r.t_max - 3.211).abs() < 1e-3);
        // symmetric pair ties, left wins
        assert_eq!(r.best.curvature, Curvature::Arc(7.5));
        assert_eq!(r.best_slot(), 0);
        let (lo, hi) = r.time_range(20);
        assert!((lo - 2.5 * 0.86).abs() < 1e-12 && (hi - 2.5 * 1.26).abs() < 1e-12);
    }

    #[test]
    fn facing_wall_at_clearance() {
        let b = GainBounds::default();
        let c = candidate_paths(10, &b);
        let env = PhysEnv::rectangle(5.0, 5.0, 0.2).unwrap();
        let r = walk_times(&Pose::new(Vec2::new(2.3, 0.0), 0.0), 1.0, &env, &c, &b).unwrap();
        assert!(r.lengths[20] < 1e-12);
        // every candidate leaves free space at once
        assert!(r.t_max < 1e-12);
    }

    #[test]
    fn unbounded_when_every_circle_is_free() {
        let b = GainBounds::default();
        let c = candidate_paths(10, &b);
        let env = PhysEnv::rectangle(10_000.0, 10_000.0, 0.2).unwrap();
        let r = walk_times(&Pose::new(Vec2::new(0.0, 0.0), 0.3), 1.0, &env, &c, &b).unwrap();
        assert!(r.lengths[..20].iter().all(|l| l.is_infinite()));
        assert!(r.t_max.is_infinite());
        // all arcs tie at infinity; the gentlest (largest left factor) wins
        assert_eq!(r.best.index, 19);
    }

    #[test]
    fn orientation_scan() {
        let (env, c, b) = setup();
        let th = skeleton_orientations(30);
        assert_eq!(th.len(), 30);
        assert_eq!(th[29], 0.0);
        let best = t_max_over_orientations(Vec2::new(0.0, 0.0), 1.0, &env, &th, &c, &b).unwrap();
        let each: Vec<f64> = th
            .iter()
            .map(|&t| walk_times(&Pose::new(Vec2::new(0.0, 0.0), t), 1.0, &env, &c, &b).unwrap().t_max)
            .collect();
        assert_eq!(best.t_max, each.iter().copied().fold(0.0, f64::max));
        assert!(best.t_max >= 3.211);

        let single = t_max_over_orientations(Vec2::new(1.0, 0.5), 1.0, &env, &[0.7], &c, &b).unwrap();
        let direct = walk_times(&Pose::new(Vec2::new(1.0, 0.5), 0.7), 1.0, &env, &c, &b).unwrap();
        assert_eq!(single.t_max, direct.t_max);

        let corner = Vec2::new(2.0, 2.0);
        let best = t_max_over_orientations(corner, 1.0, &env, &th, &c, &b).unwrap();
        for &t in &th {
            let r = walk_times(&Pose::new(corner, t), 1.0, &env, &c, &b).unwrap();
            assert!(best.t_max >= r.t_max);
        }
        // best heading points back into the room (roughly toward the far corner)
        let dir = Vec2::from_angle(best.heading);
        assert!(dir.x < 0.0 && dir.y < 0.0, "{}", best.heading);
    }

    #[test]
    fn speed_scaling_is_exact() {
        let (env, c, b) = setup();
        let pose = Pose::new(Vec2::new(0.4, -1.1), 2.0);
        let r1 = walk_times(&pose, 1.0, &env, &c, &b).unwrap();
        let r2 = walk_times(&pose, 2.0, &env, &c, &b).unwrap();
        for (a, b) in r1.times.iter().zip(&r2.times) {
            assert_eq!(*a, 2.0 * b);
        }
        assert_eq!(r1.t_max, 2.0 * r2.t_max);
        assert!(walk_times(&pose, 0.0, &env, &c, &b).is_err());
    }
}
