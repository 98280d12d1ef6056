//! Steering baselines: steer-to-center, steer-to-orbit and zigzag, with a
//! gradient-based reset.
//!
//! All three steer by switching between the tightest permitted arc toward a
//! desired heading and walking straight once the heading error is inside a
//! deadband. They never scale translation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaincurve::{GainBounds, RedirectionCommand};
use crate::geom::{first_hit_along, wrap_angle, Curvature, PhysEnv, Point2, Pose, Vec2};
use crate::horizon::t_max_over_orientations;

use super::Planner;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    S2c,
    S2o,
    Zigzag,
}

/// Steering-loop constants shared by the baselines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineParams {
    /// Heading error below which the user walks straight (degrees).
    pub deadband_deg: f64,
    /// Steer-to-center walks straight within this distance of the centroid (m).
    pub center_radius: f64,
    /// Orbit radius as a fraction of the smaller half-extent.
    pub orbit_fraction: f64,
    /// Zigzag waypoints as fractions along the long axis.
    pub zigzag_fractions: [f64; 2],
    /// Distance at which zigzag switches to the other waypoint (m).
    pub zigzag_switch_radius: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            deadband_deg: 10.0,
            center_radius: 0.1,
            orbit_fraction: 0.4,
            zigzag_fractions: [0.3, 0.7],
            zigzag_switch_radius: 0.5,
        }
    }
}

impl BaselineParams {
    pub fn check(&self) -> Result<()> {
        let ok = self.deadband_deg >= 0.0
            && self.deadband_deg < 180.0
            && self.center_radius >= 0.0
            && self.orbit_fraction > 0.0
            && self.orbit_fraction <= 1.0
            && self.zigzag_fractions.iter().all(|f| (0.0..=1.0).contains(f))
            && self.zigzag_switch_radius > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid baseline parameters {self:?}")))
        }
    }
}

/// Per-user state a baseline keeps between steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BaselineMemory {
    /// Which zigzag waypoint is active.
    pub zigzag_waypoint: usize,
}

fn steer_toward(pose: &Pose, desired: f64, params: &BaselineParams, bounds: &GainBounds) -> Curvature {
    let err = wrap_angle(desired - pose.heading());
    if err.abs() <= params.deadband_deg.to_radians() {
        Curvature::Straight
    } else {
        Curvature::Arc(err.signum() * bounds.r_min)
    }
}

/// Centered orbit radius used by steer-to-orbit.
pub fn orbit_radius(env: &PhysEnv, params: &BaselineParams) -> f64 {
    let (lo, hi) = env.bounds();
    0.5 * (hi.x - lo.x).min(hi.y - lo.y) * params.orbit_fraction
}

/// The two zigzag waypoints on the long axis of the bounding box.
pub fn zigzag_waypoints(env: &PhysEnv, params: &BaselineParams) -> [Point2; 2] {
    let (lo, hi) = env.bounds();
    let mid = Vec2::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
    params.zigzag_fractions.map(|f| {
        if hi.x - lo.x >= hi.y - lo.y {
            Vec2::new(lo.x + f * (hi.x - lo.x), mid.y)
        } else {
            Vec2::new(mid.x, lo.y + f * (hi.y - lo.y))
        }
    })
}

fn orbit_heading(pose: &Pose, center: Point2, rho: f64) -> Option<f64> {
    let to_c = center - pose.position;
    let d = to_c.norm();
    let h = pose.heading();
    let closest = |a: f64, b: f64| {
        if wrap_angle(a - h).abs() <= wrap_angle(b - h).abs() {
            a
        } else {
            b
        }
    };
    if d > rho {
        let bearing = to_c.angle();
        let off = (rho / d).asin();
        Some(closest(bearing + off, bearing - off))
    } else if d > 0.0 {
        let radial = (pose.position - center).angle();
        let half = std::f64::consts::FRAC_PI_2;
        Some(closest(radial + half, radial - half))
    } else {
        None
    }
}

/// Steering command for one baseline at the current physical pose.
pub fn baseline_step(
    method: Baseline,
    pose: &Pose,
    env: &PhysEnv,
    bounds: &GainBounds,
    params: &BaselineParams,
    memory: &mut BaselineMemory,
) -> RedirectionCommand {
    let desired = match method {
        Baseline::S2c => {
            let to_c = env.centroid() - pose.position;
            (to_c.norm() > params.center_radius).then(|| to_c.angle())
        }
        Baseline::S2o => orbit_heading(pose, env.centroid(), orbit_radius(env, params)),
        Baseline::Zigzag => {
            let wps = zigzag_waypoints(env, params);
            let slot = memory.zigzag_waypoint % 2;
            if pose.position.dist(wps[slot]) < params.zigzag_switch_radius {
                memory.zigzag_waypoint = 1 - slot;
            }
            Some((wps[memory.zigzag_waypoint] - pose.position).angle())
        }
    };
    let curvature = desired.map_or(Curvature::Straight, |d| steer_toward(pose, d, params, bounds));
    RedirectionCommand::walk(curvature, 1.0)
}

/// Heading of the inverse-square repulsion summed over every wall segment.
pub fn r2g_reset_heading(position: Point2, env: &PhysEnv) -> Result<f64> {
    if !env.contains(position) {
        return Err(Error::PoseOutsideFreeSpace {
            x: position.x,
            y: position.y,
        });
    }
    let mut sum = Vec2::new(0.0, 0.0);
    let mut scale = 0.0;
    for w in env.walls() {
        let away = position - w.closest_point(position);
        let d = away.norm();
        let unit = away.normalized().unwrap_or(w.normal);
        let weight = 1.0 / d.max(1e-9).powi(2);
        sum = sum + unit * weight;
        scale += weight;
    }
    if sum.norm() <= 1e-9 * scale {
        return Err(Error::ZeroGradient {
            x: position.x,
            y: position.y,
        });
    }
    Ok(crate::geom::normalize_heading(sum.angle()))
}

impl Planner {
    /// Heading of the longest walk over the skeleton orientations.
    pub fn best_orientation(&self, position: Point2, speed: f64, env: &PhysEnv) -> Result<f64> {
        Ok(t_max_over_orientations(
            position,
            speed,
            env,
            &self.orientations,
            &self.candidates,
            &self.bounds,
        )?
        .heading)
    }

    /// Reset heading for a baseline user during a common reset: the gradient
    /// heading for the user who triggered it, the best orientation otherwise.
    pub fn baseline_reset_heading(
        &self,
        position: Point2,
        speed: f64,
        env: &PhysEnv,
        triggered: bool,
    ) -> Result<f64> {
        if triggered {
            match r2g_reset_heading(position, env) {
                Ok(h) => {
                    let open = first_hit_along(&Pose::new(position, h), Curvature::Straight, env);
                    if open > 1e-6 {
                        return Ok(h);
                    }
                }
                Err(Error::ZeroGradient { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        self.best_orientation(position, speed, env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reach::RadiusSearch;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn square() -> PhysEnv {
        PhysEnv::rectangle(5.0, 5.0, 0.2).unwrap()
    }

    fn step(m: Baseline, pose: Pose, mem: &mut BaselineMemory) -> RedirectionCommand {
        baseline_step(
            m,
            &pose,
            &square(),
            &GainBounds::default(),
            &BaselineParams::default(),
            mem,
        )
    }

    #[test]
    fn s2c_examples() {
        let mut mem = BaselineMemory::default();
        for h in [0.0, 1.0, 4.0] {
            let c = step(Baseline::S2c, Pose::new(Vec2::new(0.0, 0.0), h), &mut mem);
            assert_eq!(c.curvature, Curvature::Straight);
            assert_eq!(c.g_t, 1.0);
        }
        // center is 90 degrees to the left
        let c = step(Baseline::S2c, Pose::new(Vec2::new(1.0, 0.0), FRAC_PI_2), &mut mem);
        assert_eq!(c.curvature, Curvature::Arc(7.5));
        let c = step(Baseline::S2c, Pose::new(Vec2::new(1.0, 0.0), -FRAC_PI_2), &mut mem);
        assert_eq!(c.curvature, Curvature::Arc(-7.5));
        let c = step(Baseline::S2c, Pose::new(Vec2::new(1.0, 0.0), PI + 0.1), &mut mem);
        assert_eq!(c.curvature, Curvature::Straight);
    }

    #[test]
    fn s2o_on_orbit_tangent_is_straight() {
        let rho = orbit_radius(&square(), &BaselineParams::default());
        assert!((rho - 1.0).abs() < 1e-12);
        let mut mem = BaselineMemory::default();
        let c = step(Baseline::S2o, Pose::new(Vec2::new(rho, 0.0), FRAC_PI_2), &mut mem);
        assert_eq!(c.curvature, Curvature::Straight);
        let c = step(Baseline::S2o, Pose::new(Vec2::new(0.0, -rho), PI), &mut mem);
        assert_eq!(c.curvature, Curvature::Straight);
        // outside the orbit heading away: turn back
        let c = step(Baseline::S2o, Pose::new(Vec2::new(2.0, 0.0), 0.0), &mut mem);
        assert_ne!(c.curvature, Curvature::Straight);
    }

    #[test]
    fn zigzag_alternates() {
        let wps = zigzag_waypoints(&square(), &BaselineParams::default());
        assert!((wps[0].x + 1.0).abs() < 1e-12 && (wps[1].x - 1.0).abs() < 1e-12);
        let mut mem = BaselineMemory::default();
        let c = step(Baseline::Zigzag, Pose::new(Vec2::new(1.5, 0.0), PI), &mut mem);
        assert_eq!(c.curvature, Curvature::Straight);
        assert_eq!(mem.zigzag_waypoint, 0);
        let c = step(Baseline::Zigzag, Pose::new(Vec2::new(-1.2, 0.0), PI), &mut mem);
        assert_eq!(mem.zigzag_waypoint, 1);
        assert_ne!(c.curvature, Curvature::Straight);
        let tall = PhysEnv::rectangle(2.5, 5.0, 0.2).unwrap();
        let w = zigzag_waypoints(&tall, &BaselineParams::default());
        assert_eq!(w[0].x, 0.0);
        assert!((w[1].y - 1.0).abs() < 1e-12);
    }

    /// Repulsion of a 5x5 square at `p`, each wall written out by hand.
    fn square_field(p: Vec2) -> Vec2 {
        let h = 2.5;
        let clamp = |v: f64| v.clamp(-h, h);
        let closest = [
            Vec2::new(h, clamp(p.y)),
            Vec2::new(-h, clamp(p.y)),
            Vec2::new(clamp(p.x), h),
            Vec2::new(clamp(p.x), -h),
        ];
        closest.iter().fold(Vec2::new(0.0, 0.0), |acc, &c| {
            let d = p - c;
            acc + d * (1.0 / d.norm().powi(3))
        })
    }

    #[test]
    fn r2g_examples() {
        let env = square();
        for p in [Vec2::new(2.1, 0.3), Vec2::new(-1.0, 1.7), Vec2::new(0.4, -2.2)] {
            let h = r2g_reset_heading(p, &env).unwrap();
            let want = square_field(p).angle();
            assert!(wrap_angle(h - want).abs() < 1e-9, "{p:?}");
        }
        let h = r2g_reset_heading(Vec2::new(2.2, 0.0), &env).unwrap();
        assert!(wrap_angle(h - PI).abs() < 1e-9);
        let h = r2g_reset_heading(Vec2::new(2.0, 2.0), &env).unwrap();
        assert!(wrap_angle(h - 1.25 * PI).abs() < 1e-9);
        assert!(matches!(
            r2g_reset_heading(Vec2::new(0.0, 0.0), &env),
            Err(Error::ZeroGradient { .. })
        ));
    }

    #[test]
    fn baseline_reset_falls_back_at_symmetric_point() {
        let env = square();
        let planner = Planner::new(GainBounds::default(), 10, 30, RadiusSearch::Continuous).unwrap();
        let c = Vec2::new(0.0, 0.0);
        let h = planner.baseline_reset_heading(c, 1.0, &env, true).unwrap();
        assert_eq!(h, planner.best_orientation(c, 1.0, &env).unwrap());
        let p = Vec2::new(2.3, 0.5);
        let h = planner.baseline_reset_heading(p, 1.0, &env, true).unwrap();
        assert_eq!(h, r2g_reset_heading(p, &env).unwrap());
    }
}
