//! Exact 2D primitives for planning over a physical room.
//!
//! Positions are in meters, headings in radians measured counter-clockwise
//! from +x. A positive signed radius bends the path to the walker's left.

mod env;
mod query;

pub use env::{EnvFile, PhysEnv, Wall};
pub use query::{arc_blocked, first_hit_arc, first_hit_straight, segment_blocked, Chirality};

pub(crate) use query::{first_hit_along, path_blocked};

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Absolute tolerance for geometric predicates (meters).
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub type Point2 = Vec2;

impl Vec2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Rotated by +90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_heading(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap_angle(delta: f64) -> f64 {
    let t = normalize_heading(delta);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// Position plus heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    heading: f64,
}

impl Pose {
    pub fn new(position: Point2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_heading(heading),
        }
    }

    #[inline]
    pub fn heading(&self) -> f64 {
        self.heading
    }

    #[inline]
    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    pub fn with_heading(self, heading: f64) -> Self {
        Self::new(self.position, heading)
    }
}

/// Steering applied over one walking segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Straight,
    /// Signed radius in meters; positive turns left.
    Arc(f64),
}

impl Curvature {
    /// Signed curvature `1 / r`, zero when straight.
    pub fn kappa(self) -> f64 {
        match self {
            Curvature::Straight => 0.0,
            Curvature::Arc(r) => 1.0 / r,
        }
    }

    pub fn radius(self) -> Option<f64> {
        match self {
            Curvature::Straight => None,
            Curvature::Arc(r) => Some(r),
        }
    }
}

/// Constant-curvature path starting at a pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcPath {
    pub start: Pose,
    pub curvature: Curvature,
    pub length: f64,
}

impl ArcPath {
    pub fn new(start: Pose, curvature: Curvature, length: f64) -> Self {
        Self {
            start,
            curvature,
            length,
        }
    }

    /// Pose after walking `s` meters along the path (not clamped to `length`).
    pub fn pose_at(&self, s: f64) -> Pose {
        advance(self.start, self.curvature, s)
    }

    pub fn end(&self) -> Pose {
        self.pose_at(self.length)
    }

    /// Center of the turning circle, if curved.
    pub fn center(&self) -> Option<Point2> {
        self.curvature
            .radius()
            .map(|r| self.start.position + self.start.direction().perp() * r)
    }
}

/// Closed-form constant-curvature motion: walks `s` meters from `pose`.
pub fn advance(pose: Pose, curvature: Curvature, s: f64) -> Pose {
    let th = pose.heading();
    match curvature {
        Curvature::Straight => Pose::new(pose.position + Vec2::from_angle(th) * s, th),
        Curvature::Arc(r) => {
            let dth = s / r;
            // chord form keeps precision for tiny arcs
            let half = 0.5 * dth;
            let chord = if half.abs() < 1e-8 {
                s
            } else {
                2.0 * r * half.sin()
            };
            let p = pose.position + Vec2::from_angle(th + half) * chord;
            Pose::new(p, th + dth)
        }
    }
}
