#![allow(dead_code)]

use proptest::prelude::*;
use rdw_core::geom::{PhysEnv, Point2, Vec2};

/// Rectangle room, optionally with a box obstacle somewhere inside.
#[derive(Clone, Debug)]
pub struct RoomSpec {
    pub w: f64,
    pub h: f64,
    pub clearance: f64,
    pub obstacle: Option<(f64, f64, f64, f64)>,
}

impl RoomSpec {
    pub fn build(&self) -> PhysEnv {
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        let boundary = vec![
            Vec2::new(-hw, -hh),
            Vec2::new(hw, -hh),
            Vec2::new(hw, hh),
            Vec2::new(-hw, hh),
        ];
        let obstacles = self
            .obstacle
            .map(|(cx, cy, ow, oh)| {
                let (x0, y0) = (cx * (hw - ow), cy * (hh - oh));
                vec![vec![
                    Vec2::new(x0 - ow / 2.0, y0 - oh / 2.0),
                    Vec2::new(x0 + ow / 2.0, y0 - oh / 2.0),
                    Vec2::new(x0 + ow / 2.0, y0 + oh / 2.0),
                    Vec2::new(x0 - ow / 2.0, y0 + oh / 2.0),
                ]]
            })
            .unwrap_or_default();
        PhysEnv::new(boundary, obstacles, self.clearance).unwrap()
    }
}

pub fn room() -> impl Strategy<Value = RoomSpec> {
    (
        3.0..9.0f64,
        3.0..9.0f64,
        0.0..0.3f64,
        proptest::option::of((-0.6..0.6f64, -0.6..0.6f64, 0.3..1.2f64, 0.3..1.2f64)),
    )
        .prop_map(|(w, h, clearance, obstacle)| RoomSpec {
            w,
            h,
            clearance,
            obstacle,
        })
}

/// Maps unit coordinates into the room's bounding box.
pub fn at(env: &PhysEnv, u: f64, v: f64) -> Point2 {
    let (lo, hi) = env.bounds();
    Vec2::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y))
}
