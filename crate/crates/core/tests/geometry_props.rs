mod common;

use common::{at, room};
use proptest::prelude::*;
use rdw_core::gaincurve::{candidate_paths, GainBounds};
use rdw_core::geom::{advance, first_hit_arc, first_hit_straight, segment_blocked, Curvature, Pose};

fn hit(pose: &Pose, c: Curvature, env: &rdw_core::geom::PhysEnv) -> f64 {
    match c {
        Curvature::Straight => first_hit_straight(pose, env).unwrap(),
        Curvature::Arc(r) => first_hit_arc(pose, r, env).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn advance_composes(
        x in -5.0..5.0f64, y in -5.0..5.0f64, th in 0.0..6.3f64,
        r in prop_oneof![Just(0.0), 1.0..50.0f64, -50.0..-1.0f64],
        s1 in 0.0..20.0f64, s2 in 0.0..20.0f64,
    ) {
        let c = if r == 0.0 { Curvature::Straight } else { Curvature::Arc(r) };
        let p = Pose::new(rdw_core::geom::Vec2::new(x, y), th);
        let a = advance(advance(p, c, s1), c, s2);
        let b = advance(p, c, s1 + s2);
        prop_assert!(a.position.dist(b.position) < 1e-9);
        prop_assert!(rdw_core::geom::wrap_angle(a.heading() - b.heading()).abs() < 1e-9);
    }

    #[test]
    fn first_hit_lands_on_clearance_boundary(
        spec in room(), u in 0.0..1.0f64, v in 0.0..1.0f64, th in 0.0..6.3f64, slot in 0usize..21,
    ) {
        let env = spec.build();
        let p = at(&env, u, v);
        prop_assume!(env.contains(p));
        let c = candidate_paths(10, &GainBounds::default())[slot].curvature;
        let pose = Pose::new(p, th);
        let l = hit(&pose, c, &env);
        prop_assert!(l >= 0.0);
        if l.is_finite() {
            let end = advance(pose, c, l);
            let d = env.wall_distance(end.position);
            prop_assert!((d - env.clearance()).abs() < 1e-6, "end distance {d}");
            for k in 1..20 {
                let q = advance(pose, c, l * k as f64 / 20.0);
                prop_assert!(env.contains(q.position));
            }
            // just past the hit the path is outside
            let beyond = advance(pose, c, l + 1e-4);
            prop_assert!(env.wall_distance(beyond.position) < env.clearance() + 1e-9
                || !env.contains(beyond.position));
        }
    }

    #[test]
    fn segment_blocked_agrees_with_sampling(
        spec in room(), u1 in 0.0..1.0f64, v1 in 0.0..1.0f64, u2 in 0.0..1.0f64, v2 in 0.0..1.0f64,
    ) {
        let env = spec.build();
        let (p, q) = (at(&env, u1, v1), at(&env, u2, v2));
        prop_assume!(env.contains(p) && env.contains(q));
        let blocked = segment_blocked(p, q, &env);
        let sampled = (0..=400).any(|k| {
            let t = k as f64 / 400.0;
            !env.contains(p + (q - p) * t)
        });
        if sampled {
            prop_assert!(blocked);
        }
    }
}
