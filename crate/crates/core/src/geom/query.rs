//! First-hit queries against the clearance-eroded free space.
//!
//! Each wall inflated by the clearance is a capsule. Leaving free space means
//! entering a capsule, and a walker that starts in free space can only enter
//! one through the face on the free side or through a vertex cap, so only
//! those two pieces are intersected. With zero clearance the front face is the
//! wall itself and the caps vanish.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{Curvature, PhysEnv, Point2, Pose, Vec2, Wall, GEOM_EPS};
use crate::error::{Error, Result};

/// Turning direction of an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chirality {
    Left,
    Right,
}

impl Chirality {
    pub fn sign(self) -> f64 {
        match self {
            Chirality::Left => 1.0,
            Chirality::Right => -1.0,
        }
    }
}

fn require_free(pose: &Pose, env: &PhysEnv) -> Result<()> {
    if env.contains(pose.position) {
        Ok(())
    } else {
        Err(Error::PoseOutsideFreeSpace {
            x: pose.position.x,
            y: pose.position.y,
        })
    }
}

/// Distance along the heading ray to the first exit from free space.
pub fn first_hit_straight(pose: &Pose, env: &PhysEnv) -> Result<f64> {
    require_free(pose, env)?;
    Ok(hit_straight(pose, env))
}

/// Arc length along the circle of `signed_radius` tangent to the heading until
/// the first exit from free space; infinite if the whole circle is free.
pub fn first_hit_arc(pose: &Pose, signed_radius: f64, env: &PhysEnv) -> Result<f64> {
    require_free(pose, env)?;
    if signed_radius == 0.0 || !signed_radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "arc radius must be finite and non-zero, got {signed_radius}"
        )));
    }
    Ok(hit_arc(pose, signed_radius, env))
}

/// Unchecked first-hit distance for either kind of path.
pub(crate) fn first_hit_along(pose: &Pose, curvature: Curvature, env: &PhysEnv) -> f64 {
    match curvature {
        Curvature::Straight => hit_straight(pose, env),
        Curvature::Arc(r) => hit_arc(pose, r, env),
    }
}

/// True when walking `length` meters from `pose` leaves free space before the end.
pub(crate) fn path_blocked(pose: &Pose, curvature: Curvature, length: f64, env: &PhysEnv) -> bool {
    if !env.contains(pose.position) {
        return true;
    }
    first_hit_along(pose, curvature, env) < length - GEOM_EPS
}

/// Whether the open segment `p -> q` leaves free space.
pub fn segment_blocked(p: Point2, q: Point2, env: &PhysEnv) -> bool {
    let d = q - p;
    let len = d.norm();
    if len <= GEOM_EPS {
        return !env.contains(p);
    }
    path_blocked(&Pose::new(p, d.angle()), Curvature::Straight, len, env)
}

/// Initial heading and swept angle of the minor arc of `radius` from `p` to `q`.
pub(crate) fn minor_arc(p: Point2, q: Point2, radius: f64, chirality: Chirality) -> Result<(f64, f64)> {
    let chord = p.dist(q);
    if chord > 2.0 * radius + GEOM_EPS {
        return Err(Error::ChordTooLong { chord, radius });
    }
    let half = (chord / (2.0 * radius)).min(1.0).asin();
    let heading = (q - p).angle() - chirality.sign() * half;
    Ok((heading, 2.0 * half))
}

/// Whether the minor arc of the given radius and chirality from `p` to `q`
/// leaves free space.
pub fn arc_blocked(
    p: Point2,
    q: Point2,
    radius: f64,
    chirality: Chirality,
    env: &PhysEnv,
) -> Result<bool> {
    let radius = radius.abs();
    let (heading, sweep) = minor_arc(p, q, radius, chirality)?;
    if sweep == 0.0 {
        return Ok(!env.contains(p));
    }
    Ok(path_blocked(
        &Pose::new(p, heading),
        Curvature::Arc(chirality.sign() * radius),
        radius * sweep,
        env,
    ))
}

fn hit_straight(pose: &Pose, env: &PhysEnv) -> f64 {
    let p = pose.position;
    let h = pose.direction();
    let c = env.clearance();
    let mut best = f64::INFINITY;
    for w in env.walls() {
        if let Some(t) = ray_front_face(p, h, w, c) {
            best = best.min(t);
        }
        if c > 0.0 {
            if let Some(t) = ray_circle_entry(p, h, w.a, c) {
                best = best.min(t);
            }
        }
    }
    best
}

fn ray_front_face(p: Point2, h: Vec2, w: &Wall, c: f64) -> Option<f64> {
    let approach = w.normal.dot(h);
    if approach >= 0.0 {
        return None;
    }
    let d0 = w.normal.dot(p - w.a) - c;
    let t = -d0 / approach;
    if t < -GEOM_EPS {
        return None;
    }
    let u = (p + h * t - w.a).dot(w.dir);
    (u >= -GEOM_EPS && u <= w.len + GEOM_EPS).then_some(t.max(0.0))
}

fn ray_circle_entry(p: Point2, h: Vec2, center: Point2, r: f64) -> Option<f64> {
    let m = p - center;
    let b = m.dot(h);
    let disc = b * b - (m.norm_sq() - r * r);
    if disc <= 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= -GEOM_EPS).then_some(t.max(0.0))
}

/// Cosine slack within which a circle is treated as tangent.
const TANGENT_EPS: f64 = 1e-13;

struct Circle {
    center: Point2,
    radius: f64,
    /// +1 counter-clockwise, -1 clockwise.
    spin: f64,
    start_angle: f64,
}

impl Circle {
    fn point(&self, phi: f64) -> Point2 {
        self.center + Vec2::from_angle(phi) * self.radius
    }

    /// Unit direction of motion at angular position `phi`.
    fn tangent(&self, phi: f64) -> Vec2 {
        Vec2::from_angle(phi).perp() * self.spin
    }

    /// Arc length travelled from the start to angular position `phi`.
    fn travel(&self, phi: f64) -> f64 {
        let mut delta = ((phi - self.start_angle) * self.spin).rem_euclid(TAU);
        if (TAU - delta) * self.radius <= GEOM_EPS {
            delta = 0.0;
        }
        delta * self.radius
    }
}

fn hit_arc(pose: &Pose, signed_radius: f64, env: &PhysEnv) -> f64 {
    let p = pose.position;
    let radius = signed_radius.abs();
    let center = p + pose.direction().perp() * signed_radius;
    let circle = Circle {
        center,
        radius,
        spin: signed_radius.signum(),
        start_angle: (p - center).angle(),
    };
    let c = env.clearance();
    let mut best = f64::INFINITY;
    for w in env.walls() {
        arc_front_face(&circle, w, c, &mut best);
        if c > 0.0 {
            arc_circle_entry(&circle, w.a, c, &mut best);
        }
    }
    best
}

fn arc_front_face(circle: &Circle, w: &Wall, c: f64, best: &mut f64) {
    // n . (center + R u(phi) - a) - c = 0  =>  cos(phi - psi) = -k / R
    let k = w.normal.dot(circle.center - w.a) - c;
    let cos_val = -k / circle.radius;
    // touching the line from the free side is not an exit
    if cos_val <= -1.0 + TANGENT_EPS || cos_val > 1.0 + TANGENT_EPS {
        return;
    }
    let psi = w.normal.angle();
    // touching from the wall side exits at the contact point
    if cos_val >= 1.0 - TANGENT_EPS {
        let u = (circle.point(psi) - w.a).dot(w.dir);
        if u >= -GEOM_EPS && u <= w.len + GEOM_EPS {
            *best = best.min(circle.travel(psi));
        }
        return;
    }
    let gamma = cos_val.acos();
    for phi in [psi + gamma, psi - gamma] {
        if w.normal.dot(circle.tangent(phi)) >= 0.0 {
            continue;
        }
        let x = circle.point(phi);
        let u = (x - w.a).dot(w.dir);
        if u < -GEOM_EPS || u > w.len + GEOM_EPS {
            continue;
        }
        *best = best.min(circle.travel(phi));
    }
}

fn arc_circle_entry(circle: &Circle, cap: Point2, r: f64, best: &mut f64) {
    let to_cap = cap - circle.center;
    let d = to_cap.norm();
    if d == 0.0 || d > circle.radius + r || d < (circle.radius - r).abs() {
        return;
    }
    let cos_val = (circle.radius * circle.radius + d * d - r * r) / (2.0 * circle.radius * d);
    // tangent circles never enter each other
    if cos_val.abs() >= 1.0 - TANGENT_EPS {
        return;
    }
    let beta = to_cap.angle();
    let gamma = cos_val.acos();
    for phi in [beta + gamma, beta - gamma] {
        let x = circle.point(phi);
        if (x - cap).dot(circle.tangent(phi)) >= 0.0 {
            continue;
        }
        *best = best.min(circle.travel(phi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::advance;
    use std::f64::consts::PI;

    fn square(clearance: f64) -> PhysEnv {
        PhysEnv::rectangle(5.0, 5.0, clearance).unwrap()
    }

    fn origin(heading: f64) -> Pose {
        Pose::new(Vec2::new(0.0, 0.0), heading)
    }

    #[test]
    fn straight_examples() {
        let env = square(0.0);
        assert!((first_hit_straight(&origin(0.0), &env).unwrap() - 2.5).abs() < 1e-12);
        let p = Pose::new(Vec2::new(2.0, 0.0), 0.0);
        assert!((first_hit_straight(&p, &env).unwrap() - 0.5).abs() < 1e-12);
        let env = square(0.2);
        assert!((first_hit_straight(&origin(0.0), &env).unwrap() - 2.3).abs() < 1e-12);
    }

    #[test]
    fn straight_into_corner_cap() {
        // diagonal ray toward the corner hits the clearance square corner
        let env = square(0.2);
        let d = first_hit_straight(&origin(PI / 4.0), &env).unwrap();
        assert!((d - 2.3 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn arc_examples() {
        let env = square(0.0);
        // circle centered at (0, 7.5) meets x = 2.5 after sweeping asin(1/3)
        let expected = 7.5 * (1.0f64 / 3.0).asin();
        let l = first_hit_arc(&origin(0.0), 7.5, &env).unwrap();
        assert!((l - expected).abs() < 1e-12, "{l}");
        assert!((l - 2.5487).abs() < 1e-4);
        let r = first_hit_arc(&origin(0.0), -7.5, &env).unwrap();
        assert!((l - r).abs() < 1e-12);
    }

    #[test]
    fn arc_in_open_corridor_is_infinite() {
        let env = PhysEnv::rectangle(200.0, 40.0, 0.2).unwrap();
        let l = first_hit_arc(&origin(0.0), 7.5, &env).unwrap();
        assert!(l.is_infinite());
        assert!(first_hit_straight(&origin(0.0), &env).unwrap().is_finite());
    }

    #[test]
    fn outside_pose_is_rejected() {
        let env = square(0.2);
        let p = Pose::new(Vec2::new(2.4, 0.0), 0.0);
        assert!(matches!(
            first_hit_straight(&p, &env),
            Err(Error::PoseOutsideFreeSpace { .. })
        ));
        assert!(first_hit_arc(&p, 7.5, &env).is_err());
    }

    #[test]
    fn on_clearance_boundary() {
        let env = square(0.2);
        let facing = Pose::new(Vec2::new(2.3, 0.0), 0.0);
        assert!(first_hit_straight(&facing, &env).unwrap() < 1e-12);
        let away = Pose::new(Vec2::new(2.3, 0.0), PI);
        assert!((first_hit_straight(&away, &env).unwrap() - 4.6).abs() < 1e-9);
        // a curved path leaving the wall tangentially stays free at first
        let along = Pose::new(Vec2::new(2.3, 0.0), PI / 2.0);
        assert!(first_hit_arc(&along, 7.5, &env).unwrap() > 1.0);
        assert!(first_hit_arc(&along, -7.5, &env).unwrap() < 1e-12);
        // tangent to the bottom line, curving into the wall
        let west = Pose::new(Vec2::new(1.8624489604096819, -2.3), PI);
        assert!(first_hit_arc(&west, 16.5201694843895, &env).unwrap() < 1e-12);
        assert!(first_hit_arc(&west, -16.5201694843895, &env).unwrap() > 1.0);
    }

    #[test]
    fn segment_queries() {
        let obs = vec![
            Vec2::new(-0.5, -0.5),
            Vec2::new(0.5, -0.5),
            Vec2::new(0.5, 0.5),
            Vec2::new(-0.5, 0.5),
        ];
        let env = PhysEnv::new(square(0.2).boundary().to_vec(), vec![obs], 0.2).unwrap();
        let empty = square(0.2);
        let a = Vec2::new(-1.5, 0.0);
        let b = Vec2::new(1.5, 0.0);
        assert!(!segment_blocked(a, b, &empty));
        assert!(segment_blocked(a, b, &env));
        assert!(segment_blocked(a, Vec2::new(4.0, 0.0), &empty));
        assert!(!segment_blocked(Vec2::new(-1.5, -1.5), Vec2::new(1.5, -1.5), &env));
    }

    #[test]
    fn arc_queries() {
        let empty = square(0.2);
        let p = Vec2::new(-1.0, 0.0);
        let q = Vec2::new(1.0, 0.0);
        assert!(!arc_blocked(p, q, 7.5, Chirality::Left, &empty).unwrap());
        assert!(!arc_blocked(p, q, 7.5, Chirality::Right, &empty).unwrap());
        // semicircle of radius 1 bulges to y = -1 (left) or y = +1 (right)
        assert!(!arc_blocked(p, q, 1.0, Chirality::Left, &empty).unwrap());
        let obs = vec![
            Vec2::new(-0.2, -1.2),
            Vec2::new(0.2, -1.2),
            Vec2::new(0.2, -0.7),
            Vec2::new(-0.2, -0.7),
        ];
        let env = PhysEnv::new(empty.boundary().to_vec(), vec![obs], 0.1).unwrap();
        assert!(arc_blocked(p, q, 1.0, Chirality::Left, &env).unwrap());
        assert!(!arc_blocked(p, q, 1.0, Chirality::Right, &env).unwrap());
        assert!(matches!(
            arc_blocked(p, Vec2::new(1.5, 0.0), 1.0, Chirality::Left, &env),
            Err(Error::ChordTooLong { .. })
        ));
    }

    #[test]
    fn minor_arc_lands_on_target() {
        let p = Vec2::new(0.3, -0.2);
        let q = Vec2::new(1.7, 0.9);
        for chi in [Chirality::Left, Chirality::Right] {
            let (h, sweep) = minor_arc(p, q, 3.0, chi).unwrap();
            let end = advance(Pose::new(p, h), Curvature::Arc(3.0 * chi.sign()), 3.0 * sweep);
            assert!(end.position.dist(q) < 1e-12);
        }
    }
}
