use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Point2, Vec2, GEOM_EPS};
use crate::error::{Error, Result};

/// On-disk environment document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvFile {
    /// Free text; ignored by the geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub boundary: Vec<[f64; 2]>,
    #[serde(default)]
    pub obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default = "default_clearance")]
    pub clearance: f64,
}

fn default_clearance() -> f64 {
    0.2
}

/// Directed wall segment with the free side on its left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wall {
    pub a: Point2,
    pub b: Point2,
    /// Unit direction `a -> b`.
    pub dir: Vec2,
    /// Unit normal pointing into free space.
    pub normal: Vec2,
    pub len: f64,
}

impl Wall {
    fn new(a: Point2, b: Point2) -> Self {
        let d = b - a;
        let len = d.norm();
        let dir = d * (1.0 / len);
        Self {
            a,
            b,
            dir,
            normal: dir.perp(),
            len,
        }
    }

    pub fn closest_point(&self, p: Point2) -> Point2 {
        let u = (p - self.a).dot(self.dir).clamp(0.0, self.len);
        self.a + self.dir * u
    }

    pub fn distance(&self, p: Point2) -> f64 {
        p.dist(self.closest_point(p))
    }
}

/// A physical room: outer boundary, obstacles and a clearance buffer.
///
/// The boundary is stored counter-clockwise and obstacles clockwise, so every
/// wall has free space on its left. All planning happens in the free space
/// eroded by `clearance`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysEnv {
    boundary: Vec<Point2>,
    obstacles: Vec<Vec<Point2>>,
    clearance: f64,
    walls: Vec<Wall>,
}

impl PhysEnv {
    pub fn new(boundary: Vec<Point2>, obstacles: Vec<Vec<Point2>>, clearance: f64) -> Result<Self> {
        if !clearance.is_finite() || clearance < 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "clearance must be a finite non-negative number, got {clearance}"
            )));
        }
        let mut boundary = boundary;
        check_polygon(&boundary, "boundary")?;
        if signed_area(&boundary) < 0.0 {
            boundary.reverse();
        }
        let mut normalized = Vec::with_capacity(obstacles.len());
        for (i, mut obs) in obstacles.into_iter().enumerate() {
            let what = format!("obstacle {i}");
            check_polygon(&obs, &what)?;
            if signed_area(&obs) > 0.0 {
                obs.reverse();
            }
            for v in &obs {
                if !point_in_polygon_closed(*v, &boundary) {
                    return Err(Error::InvalidGeometry(format!(
                        "{what}: vertex ({}, {}) lies outside the boundary",
                        v.x, v.y
                    )));
                }
            }
            for (a, b) in edges(&obs) {
                for (c, d) in edges(&boundary) {
                    if segments_cross_properly(a, b, c, d) {
                        return Err(Error::InvalidGeometry(format!(
                            "{what}: edge crosses the boundary"
                        )));
                    }
                }
            }
            normalized.push(obs);
        }

        let mut walls: Vec<Wall> = edges(&boundary).map(|(a, b)| Wall::new(a, b)).collect();
        for obs in &normalized {
            walls.extend(edges(obs).map(|(a, b)| Wall::new(a, b)));
        }
        Ok(Self {
            boundary,
            obstacles: normalized,
            clearance,
            walls,
        })
    }

    /// Axis-aligned rectangle `[-w/2, w/2] x [-h/2, h/2]` with no obstacles.
    pub fn rectangle(width: f64, height: f64, clearance: f64) -> Result<Self> {
        let (hw, hh) = (0.5 * width, 0.5 * height);
        Self::new(
            vec![
                Vec2::new(-hw, -hh),
                Vec2::new(hw, -hh),
                Vec2::new(hw, hh),
                Vec2::new(-hw, hh),
            ],
            Vec::new(),
            clearance,
        )
    }

    pub fn from_file_data(file: &EnvFile) -> Result<Self> {
        let conv = |pts: &[[f64; 2]]| pts.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        Self::new(
            conv(&file.boundary),
            file.obstacles.iter().map(|o| conv(o)).collect(),
            file.clearance,
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let file: EnvFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_file_data(&file)
    }

    pub fn to_file_data(&self) -> EnvFile {
        let conv = |pts: &[Point2]| pts.iter().map(|p| [p.x, p.y]).collect();
        EnvFile {
            description: None,
            boundary: conv(&self.boundary),
            obstacles: self.obstacles.iter().map(|o| conv(o)).collect(),
            clearance: self.clearance,
        }
    }

    /// Same geometry with a different clearance.
    pub fn with_clearance(&self, clearance: f64) -> Result<Self> {
        Self::new(self.boundary.clone(), self.obstacles.clone(), clearance)
    }

    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    pub fn obstacles(&self) -> &[Vec<Point2>] {
        &self.obstacles
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    /// `(min, max)` corners of the boundary's bounding box.
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.boundary {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Area centroid of the boundary polygon.
    pub fn centroid(&self) -> Point2 {
        let mut a2 = 0.0;
        let mut c = Vec2::default();
        for (p, q) in edges(&self.boundary) {
            let w = p.cross(q);
            a2 += w;
            c = c + (p + q) * w;
        }
        c * (1.0 / (3.0 * a2))
    }

    /// Distance from `p` to the nearest wall (boundary or obstacle).
    pub fn wall_distance(&self, p: Point2) -> f64 {
        self.walls
            .iter()
            .map(|w| w.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership in the clearance-eroded free space (closed set, with
    /// [`GEOM_EPS`] slack).
    pub fn contains(&self, p: Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        let d = self.wall_distance(p);
        if d < self.clearance - GEOM_EPS {
            return false;
        }
        if d <= GEOM_EPS {
            // on a wall with zero clearance
            return true;
        }
        point_in_polygon(p, &self.boundary)
            && !self.obstacles.iter().any(|o| point_in_polygon(p, o))
    }

    /// SHA-256 over the normalized geometry and clearance.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        let put_poly = |h: &mut Sha256, poly: &[Point2]| {
            h.update((poly.len() as u64).to_le_bytes());
            for p in poly {
                h.update(p.x.to_bits().to_le_bytes());
                h.update(p.y.to_bits().to_le_bytes());
            }
        };
        put_poly(&mut h, &self.boundary);
        h.update((self.obstacles.len() as u64).to_le_bytes());
        for o in &self.obstacles {
            put_poly(&mut h, o);
        }
        h.update(self.clearance.to_bits().to_le_bytes());
        hex::encode(h.finalize())
    }
}

fn edges(poly: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

fn signed_area(poly: &[Point2]) -> f64 {
    0.5 * edges(poly).map(|(p, q)| p.cross(q)).sum::<f64>()
}

fn check_polygon(poly: &[Point2], what: &str) -> Result<()> {
    if poly.len() < 3 {
        return Err(Error::InvalidGeometry(format!(
            "{what}: needs at least 3 vertices, got {}",
            poly.len()
        )));
    }
    if let Some(p) = poly.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "{what}: non-finite vertex ({}, {})",
            p.x, p.y
        )));
    }
    for (i, (p, q)) in edges(poly).enumerate() {
        if p.dist(q) <= GEOM_EPS {
            return Err(Error::InvalidGeometry(format!(
                "{what}: repeated vertex at index {} (do not close the ring by repeating the first vertex)",
                (i + 1) % poly.len()
            )));
        }
    }
    let n = poly.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if adjacent {
                // adjacent edges may only share their common vertex
                let shared = if j == i + 1 { b } else { a };
                let (far1, far2) = if j == i + 1 { (a, d) } else { (b, c) };
                let e1 = far1 - shared;
                let e2 = far2 - shared;
                if e1.cross(e2).abs() <= 1e-12 * e1.norm() * e2.norm() && e1.dot(e2) > 0.0 {
                    return Err(Error::InvalidGeometry(format!(
                        "{what}: edges {i} and {j} fold back onto each other"
                    )));
                }
            } else if segments_intersect(a, b, c, d) {
                return Err(Error::InvalidGeometry(format!(
                    "{what}: self-intersection between edges {i} and {j}"
                )));
            }
        }
    }
    if signed_area(poly).abs() <= 1e-12 {
        return Err(Error::InvalidGeometry(format!("{what}: zero area")));
    }
    Ok(())
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) - GEOM_EPS
        && p.x <= a.x.max(b.x) + GEOM_EPS
        && p.y >= a.y.min(b.y) - GEOM_EPS
        && p.y <= a.y.max(b.y) + GEOM_EPS
}

/// Closed segments share at least one point.
fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Interiors cross at a single point (touching does not count).
fn segments_cross_properly(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let tol = 1e-12;
    ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
}

/// Crossing-number test; boundary points are unspecified.
pub(crate) fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let mut inside = false;
    for (a, b) in edges(poly) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn point_in_polygon_closed(p: Point2, poly: &[Point2]) -> bool {
    edges(poly).any(|(a, b)| Wall::new(a, b).distance(p) <= GEOM_EPS) || point_in_polygon(p, poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(h: f64) -> Vec<Point2> {
        vec![
            Vec2::new(-h, -h),
            Vec2::new(h, -h),
            Vec2::new(h, h),
            Vec2::new(-h, h),
        ]
    }

    #[test]
    fn orientation_is_normalized() {
        let mut cw = sq(2.5);
        cw.reverse();
        let mut obs = sq(0.5);
        obs.reverse();
        let env = PhysEnv::new(cw, vec![sq(0.5)], 0.0).unwrap();
        assert!(signed_area(env.boundary()) > 0.0);
        assert!(signed_area(&env.obstacles()[0]) < 0.0);
        let env2 = PhysEnv::new(sq(2.5), vec![obs], 0.0).unwrap();
        assert_eq!(env.walls(), env2.walls());
        // every wall's normal points to free space
        for w in env.walls() {
            let mid = (w.a + w.b) * 0.5 + w.normal * 0.1;
            assert!(env.contains(mid), "{w:?}");
        }
    }

    #[test]
    fn rejects_degenerate_polygons() {
        let mut rep = sq(1.0);
        rep.push(rep[0]);
        assert!(matches!(PhysEnv::new(rep, vec![], 0.0), Err(Error::InvalidGeometry(_))));
        let line = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert!(PhysEnv::new(line, vec![], 0.0).is_err());
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        let err = PhysEnv::new(bowtie, vec![], 0.0).unwrap_err();
        assert!(err.to_string().contains("self-intersection"), "{err}");
        assert!(PhysEnv::new(sq(1.0), vec![], -0.1).is_err());
    }

    #[test]
    fn rejects_obstacle_outside_boundary() {
        let obs = vec![Vec2::new(2.0, 2.0), Vec2::new(4.0, 2.0), Vec2::new(4.0, 3.0)];
        let err = PhysEnv::new(sq(2.5), vec![obs], 0.2).unwrap_err();
        assert!(err.to_string().contains("obstacle 0"), "{err}");
    }

    #[test]
    fn obstacle_may_touch_boundary() {
        let obs = vec![
            Vec2::new(-2.5, -0.5),
            Vec2::new(0.0, -0.5),
            Vec2::new(0.0, 0.5),
            Vec2::new(-2.5, 0.5),
        ];
        assert!(PhysEnv::new(sq(2.5), vec![obs], 0.2).is_ok());
    }

    #[test]
    fn free_space_membership() {
        let obs = sq(0.5);
        let env = PhysEnv::new(sq(2.5), vec![obs], 0.2).unwrap();
        assert!(env.contains(Vec2::new(2.0, 0.0)));
        assert!(env.contains(Vec2::new(2.3, 0.0)));
        assert!(!env.contains(Vec2::new(2.31, 0.0)));
        assert!(!env.contains(Vec2::new(0.0, 0.0)));
        assert!(!env.contains(Vec2::new(0.6, 0.0)));
        assert!(env.contains(Vec2::new(0.7, 0.0)));
        assert!(!env.contains(Vec2::new(3.0, 0.0)));
        let bare = PhysEnv::rectangle(5.0, 5.0, 0.0).unwrap();
        assert!(bare.contains(Vec2::new(2.5, 0.0)));
        assert!(!bare.contains(Vec2::new(2.5 + 1e-6, 0.0)));
    }

    #[test]
    fn centroid_and_hash() {
        let env = PhysEnv::rectangle(5.0, 2.5, 0.2).unwrap();
        assert!(env.centroid().norm() < 1e-12);
        let same = PhysEnv::from_file_data(&env.to_file_data()).unwrap();
        assert_eq!(env.content_hash(), same.content_hash());
        let other = env.with_clearance(0.3).unwrap();
        assert_ne!(env.content_hash(), other.content_hash());
    }
}
