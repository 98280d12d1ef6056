//! Deterministic multi-user trials.
//!
//! Users walk toward random virtual targets at constant speed and turn in
//! place when they arrive. Physical motion follows the active command: a
//! constant-curvature path walked at `virtual / g_t`. Events inside a step
//! (arrival, end of a turn, leaving free space) are located exactly, so a
//! reset fires at the precise moment a user reaches the clearance boundary.
//! When any user would leave free space, all walking users reset together.
//!
//! Each trial draws from ChaCha8 generators seeded with `seed`: stream 0 for
//! start poses and stream `i + 1` for user `i`'s targets.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{baseline_step, BaselineMemory, Method, UserPlanInput};
use crate::error::{Error, Result};
use crate::gaincurve::{validate, RedirectionCommand};
use crate::geom::{advance, first_hit_along, wrap_angle, Curvature, PhysEnv, Point2, Pose, Vec2};

mod config;

pub use config::{
    GridCache, SkeletonConfig, StartPose, TargetSampling, TrialConfig, TrialSetup, UserConfig,
    UserSetup,
};

/// Two events closer than this in time are simultaneous (s).
const EVENT_EPS: f64 = 1e-12;
/// Consecutive zero-length advances tolerated before a trial is abandoned.
const STALL_LIMIT: usize = 10_000;
const START_ATTEMPTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Walking,
    /// Rotating in place; `remaining` is the signed angle still to turn.
    Turning { remaining: f64 },
}

#[derive(Clone, Debug)]
pub struct UserState {
    pub physical: Pose,
    pub virtual_position: Point2,
    pub virtual_heading: f64,
    pub command: RedirectionCommand,
    pub target: Point2,
    pub virtual_distance: f64,
    pub physical_distance: f64,
    pub mode: Mode,
    seg_start: Pose,
    seg_walked: f64,
    seg_hit: f64,
    memory: BaselineMemory,
    rng: ChaCha8Rng,
    /// Started a walk toward a new target since the last common reset.
    retargeted: bool,
}

impl UserState {
    /// Physical length left on the current path before leaving free space.
    pub fn clearance_left(&self) -> f64 {
        self.seg_hit - self.seg_walked
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResetRecord {
    pub time: f64,
    pub trigger: usize,
    /// Bottleneck of the previous plan, if it had one.
    pub planned_bottleneck: Option<usize>,
    /// When the previous plan expected the bottleneck to trigger.
    pub planned_time: Option<f64>,
    /// The trigger user had reached a target and set off toward a new one
    /// after the previous reset.
    pub trigger_retargeted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub seed: u64,
    pub method: Method,
    pub common_resets: usize,
    pub virtual_distances: Vec<f64>,
    pub physical_distances: Vec<f64>,
    /// Simulated time at termination (s).
    pub sim_time: f64,
    /// Zero unless wall-clock recording is enabled.
    pub wall_time_ms: u64,
    pub command_violations: usize,
    pub violation_messages: Vec<String>,
    /// Resets whose preceding plan named a bottleneck.
    pub bottleneck_checks: usize,
    /// Of those, resets triggered by that bottleneck.
    pub bottleneck_matches: usize,
    pub resets: Vec<ResetRecord>,
}

pub struct World<'s> {
    setup: &'s TrialSetup,
    pub users: Vec<UserState>,
    pub time: f64,
    pub common_resets: usize,
    violations: usize,
    violation_messages: Vec<String>,
    bottleneck_checks: usize,
    bottleneck_matches: usize,
    last_plan: Option<(usize, f64)>,
    resets: Vec<ResetRecord>,
    stall: usize,
}

fn sample_free(env: &PhysEnv, rng: &mut ChaCha8Rng) -> Result<Point2> {
    let (lo, hi) = env.bounds();
    for _ in 0..START_ATTEMPTS {
        let p = Vec2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
        if env.contains(p) {
            return Ok(p);
        }
    }
    Err(Error::EmptyFreeSpace)
}

#[derive(Clone, Copy, Debug)]
struct Events {
    arrive: f64,
    hit: f64,
    threshold: f64,
    turn: f64,
}

impl<'s> World<'s> {
    /// Places users and issues their first commands.
    pub fn new(setup: &'s TrialSetup, seed: u64) -> Result<Self> {
        if setup.users.is_empty() {
            return Err(Error::Config("trial needs at least one user".into()));
        }
        if setup.method == Method::Ours && setup.users.iter().any(|u| u.grid.is_none()) {
            return Err(Error::Config("the ours method needs a skeleton grid per user".into()));
        }
        let mut start_rng = ChaCha8Rng::seed_from_u64(seed);
        start_rng.set_stream(0);
        let mut users = Vec::with_capacity(setup.users.len());
        for (i, u) in setup.users.iter().enumerate() {
            let position = sample_free(&u.env, &mut start_rng)?;
            let heading = start_rng.gen_range(0.0..TAU);
            let physical = u.start.unwrap_or_else(|| Pose::new(position, heading));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            users.push(UserState {
                physical,
                virtual_position: Vec2::new(0.0, 0.0),
                virtual_heading: 0.0,
                command: RedirectionCommand::walk(Curvature::Straight, 1.0),
                target: Vec2::new(0.0, 0.0),
                virtual_distance: 0.0,
                physical_distance: 0.0,
                mode: Mode::Walking,
                seg_start: physical,
                seg_walked: 0.0,
                seg_hit: f64::INFINITY,
                memory: BaselineMemory::default(),
                rng,
                retargeted: false,
            });
        }
        let mut world = Self {
            setup,
            users,
            time: 0.0,
            common_resets: 0,
            violations: 0,
            violation_messages: Vec::new(),
            bottleneck_checks: 0,
            bottleneck_matches: 0,
            last_plan: None,
            resets: Vec::new(),
            stall: 0,
        };
        for i in 0..world.users.len() {
            let target = world.sample_target(i);
            let u = &mut world.users[i];
            u.target = target;
            u.virtual_heading = (target - u.virtual_position).angle();
            let cmd = world.walk_command(i)?;
            world.begin_segment(i, cmd);
        }
        Ok(world)
    }

    pub fn setup(&self) -> &TrialSetup {
        self.setup
    }

    /// True once every user has walked the distance threshold.
    pub fn finished(&self) -> bool {
        self.users
            .iter()
            .all(|u| u.virtual_distance >= self.setup.distance_threshold)
    }

    fn sample_target(&mut self, i: usize) -> Point2 {
        let t = self.setup.target;
        let u = &mut self.users[i];
        let d = u.rng.gen_range(t.min_distance..=t.max_distance);
        let b = u.rng.gen_range(0.0..TAU);
        u.virtual_position + Vec2::from_angle(b) * d
    }

    /// Planner view of user `i`.
    pub fn plan_input(&self, i: usize) -> Option<UserPlanInput<'_>> {
        let u = &self.users[i];
        let s = &self.setup.users[i];
        Some(UserPlanInput {
            id: i,
            physical: u.physical,
            virtual_position: u.virtual_position,
            virtual_heading: u.virtual_heading,
            target: u.target,
            speed: s.speed,
            env: &s.env,
            grid: s.grid.as_deref()?,
        })
    }

    fn walk_command(&mut self, i: usize) -> Result<RedirectionCommand> {
        match self.setup.method.baseline() {
            None => {
                let input = self.plan_input(i).expect("grid checked at construction");
                self.setup.planner.on_turn_complete(&input)
            }
            Some(b) => {
                let s = &self.setup.users[i];
                let u = &mut self.users[i];
                Ok(baseline_step(
                    b,
                    &u.physical,
                    &s.env,
                    self.setup.planner.bounds(),
                    &self.setup.baseline,
                    &mut u.memory,
                ))
            }
        }
    }

    fn begin_segment(&mut self, i: usize, cmd: RedirectionCommand) {
        if let Err(issues) = validate(&cmd, self.setup.planner.bounds()) {
            self.violations += 1;
            if self.violation_messages.len() < 16 {
                self.violation_messages
                    .push(format!("t={:.6} user {i}: {}", self.time, issues.join("; ")));
            }
        }
        let env = &self.setup.users[i].env;
        let u = &mut self.users[i];
        if let Some(h) = cmd.reset_heading {
            u.physical = u.physical.with_heading(h);
        }
        u.command = cmd;
        u.seg_start = u.physical;
        u.seg_walked = 0.0;
        u.seg_hit = first_hit_along(&u.physical, cmd.curvature, env);
    }

    fn events(&self, i: usize) -> Events {
        let u = &self.users[i];
        let v = self.setup.users[i].speed;
        let mut e = Events {
            arrive: f64::INFINITY,
            hit: f64::INFINITY,
            threshold: f64::INFINITY,
            turn: f64::INFINITY,
        };
        match u.mode {
            Mode::Walking => {
                e.arrive = u.target.dist(u.virtual_position) / v;
                e.hit = (u.clearance_left().max(0.0)) * u.command.g_t / v;
                if u.virtual_distance < self.setup.distance_threshold {
                    e.threshold = (self.setup.distance_threshold - u.virtual_distance) / v;
                }
            }
            Mode::Turning { remaining } => e.turn = remaining.abs() / self.setup.turn_rate,
        }
        e
    }

    fn advance_user(&mut self, i: usize, t: f64) {
        let v = self.setup.users[i].speed;
        let rate = self.setup.turn_rate;
        let u = &mut self.users[i];
        match u.mode {
            Mode::Walking => {
                let dv = v * t;
                let dp = dv / u.command.g_t;
                u.virtual_position = u.virtual_position + Vec2::from_angle(u.virtual_heading) * dv;
                u.virtual_distance += dv;
                u.physical_distance += dp;
                u.seg_walked += dp;
                u.physical = advance(u.seg_start, u.command.curvature, u.seg_walked);
            }
            Mode::Turning { remaining } => {
                let delta = remaining.signum() * (rate * t).min(remaining.abs());
                u.physical = u.physical.with_heading(u.physical.heading() + delta);
                u.virtual_heading += delta;
                u.mode = Mode::Turning {
                    remaining: remaining - delta,
                };
            }
        }
    }

    /// Advances the world by `dt` seconds, handling every event inside it.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if let Some(b) = self.setup.method.baseline() {
            for i in 0..self.users.len() {
                if self.users[i].mode != Mode::Walking {
                    continue;
                }
                let s = &self.setup.users[i];
                let u = &mut self.users[i];
                let cmd = baseline_step(
                    b,
                    &u.physical,
                    &s.env,
                    self.setup.planner.bounds(),
                    &self.setup.baseline,
                    &mut u.memory,
                );
                if cmd.curvature != u.command.curvature {
                    self.begin_segment(i, cmd);
                }
            }
        }

        let mut remaining = dt;
        while remaining > 0.0 && !self.finished() {
            let events: Vec<Events> = (0..self.users.len()).map(|i| self.events(i)).collect();
            let next = events
                .iter()
                .map(|e| e.arrive.min(e.hit).min(e.threshold).min(e.turn))
                .fold(f64::INFINITY, f64::min);
            let t = next.min(remaining);
            for i in 0..self.users.len() {
                self.advance_user(i, t);
            }
            self.time += t;
            remaining -= t;
            if t <= EVENT_EPS {
                self.stall += 1;
                if self.stall > STALL_LIMIT {
                    return Err(Error::NumericalDivergence(format!(
                        "no progress after {STALL_LIMIT} consecutive events at t={}",
                        self.time
                    )));
                }
            } else {
                self.stall = 0;
            }
            if next > t + EVENT_EPS {
                break;
            }
            self.fire(&events, t)?;
        }
        self.check_finite()
    }

    fn fire(&mut self, events: &[Events], t: f64) -> Result<()> {
        let due = |x: f64| x <= t + EVENT_EPS;
        let threshold = self.setup.distance_threshold;
        for (i, e) in events.iter().enumerate() {
            if due(e.threshold) {
                let u = &mut self.users[i];
                u.virtual_distance = u.virtual_distance.max(threshold);
            }
            if due(e.hit) {
                let u = &mut self.users[i];
                u.seg_walked = u.seg_walked.max(u.seg_hit);
            }
        }
        for (i, e) in events.iter().enumerate() {
            if due(e.arrive) {
                self.users[i].virtual_position = self.users[i].target;
                let target = self.sample_target(i);
                let u = &mut self.users[i];
                u.target = target;
                let turn = wrap_angle((target - u.virtual_position).angle() - u.virtual_heading);
                u.mode = Mode::Turning { remaining: turn };
            }
        }
        for i in 0..self.users.len() {
            if let Mode::Turning { remaining } = self.users[i].mode {
                if remaining.abs() / self.setup.turn_rate <= EVENT_EPS {
                    let u = &mut self.users[i];
                    let finish = u.physical.heading() + remaining;
                    u.physical = u.physical.with_heading(finish);
                    u.virtual_heading = (u.target - u.virtual_position).angle();
                    u.mode = Mode::Walking;
                    u.retargeted = true;
                    let cmd = self.walk_command(i)?;
                    self.begin_segment(i, cmd);
                }
            }
        }
        if self.finished() {
            return Ok(());
        }
        let trigger = events
            .iter()
            .enumerate()
            .find(|(i, e)| due(e.hit) && self.users[*i].mode == Mode::Walking)
            .map(|(i, _)| i);
        if let Some(trigger) = trigger {
            self.common_reset(trigger)?;
        }
        Ok(())
    }

    fn common_reset(&mut self, trigger: usize) -> Result<()> {
        self.common_resets += 1;
        let planned = self.last_plan.take();
        if let Some((b, _)) = planned {
            self.bottleneck_checks += 1;
            if b == trigger {
                self.bottleneck_matches += 1;
            }
        }
        self.resets.push(ResetRecord {
            time: self.time,
            trigger,
            planned_bottleneck: planned.map(|p| p.0),
            planned_time: planned.map(|p| p.1),
            trigger_retargeted: self.users[trigger].retargeted,
        });
        for u in &mut self.users {
            u.retargeted = false;
        }
        let walking: Vec<usize> = (0..self.users.len())
            .filter(|&i| self.users[i].mode == Mode::Walking)
            .collect();
        match self.setup.method.baseline() {
            None => {
                let inputs: Vec<UserPlanInput> = walking
                    .iter()
                    .map(|&i| self.plan_input(i).expect("grid checked at construction"))
                    .collect();
                let plan = self.setup.planner.plan_common_reset(&inputs)?;
                self.last_plan = plan.bottleneck.map(|b| (b, self.time + plan.bottleneck_time));
                for d in &plan.decisions {
                    self.begin_segment(d.id, d.command);
                }
            }
            Some(b) => {
                for &i in &walking {
                    let s = &self.setup.users[i];
                    let heading = self.setup.planner.baseline_reset_heading(
                        self.users[i].physical.position,
                        s.speed,
                        &s.env,
                        i == trigger,
                    )?;
                    let u = &mut self.users[i];
                    u.physical = u.physical.with_heading(heading);
                    let mut cmd = baseline_step(
                        b,
                        &u.physical,
                        &s.env,
                        self.setup.planner.bounds(),
                        &self.setup.baseline,
                        &mut u.memory,
                    );
                    cmd.reset_heading = Some(heading);
                    self.begin_segment(i, cmd);
                }
            }
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        for (i, u) in self.users.iter().enumerate() {
            let ok = u.physical.position.is_finite()
                && u.physical.heading().is_finite()
                && u.virtual_position.is_finite()
                && u.virtual_distance.is_finite();
            if !ok {
                return Err(Error::NumericalDivergence(format!(
                    "user {i} state became non-finite at t={}",
                    self.time
                )));
            }
        }
        Ok(())
    }

    fn into_stats(self, seed: u64, wall_time_ms: u64) -> TrialStats {
        TrialStats {
            seed,
            method: self.setup.method,
            common_resets: self.common_resets,
            virtual_distances: self.users.iter().map(|u| u.virtual_distance).collect(),
            physical_distances: self.users.iter().map(|u| u.physical_distance).collect(),
            sim_time: self.time,
            wall_time_ms,
            command_violations: self.violations,
            violation_messages: self.violation_messages,
            bottleneck_checks: self.bottleneck_checks,
            bottleneck_matches: self.bottleneck_matches,
            resets: self.resets,
        }
    }
}

/// Runs one prepared trial to completion.
pub fn run_setup(setup: &TrialSetup, seed: u64) -> Result<TrialStats> {
    let clock = Instant::now();
    let mut world = World::new(setup, seed)?;
    while !world.finished() {
        world.step(setup.dt)?;
    }
    let ms = if setup.record_wall_time {
        clock.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(world.into_stats(seed, ms))
}

/// Loads, prepares and runs a trial with the config's own seed.
pub fn run_trial(config: &TrialConfig) -> Result<TrialStats> {
    let setup = config.prepare()?;
    run_setup(&setup, config.seed)
}

/// Walks a single command for `duration` seconds in steps of `dt`, starting
/// from `start` (after its reset heading, if any). Returns the final physical
/// pose and the virtual and physical distances covered.
pub fn simulate_command(
    start: Pose,
    cmd: &RedirectionCommand,
    v: f64,
    duration: f64,
    dt: f64,
) -> (Pose, f64, f64) {
    let mut pose = match cmd.reset_heading {
        Some(h) => start.with_heading(h),
        None => start,
    };
    let (mut virt, mut phys) = (0.0, 0.0);
    let steps = (duration / dt).floor() as usize;
    let rest = duration - steps as f64 * dt;
    for h in std::iter::repeat(dt).take(steps).chain(std::iter::once(rest)) {
        if h <= 0.0 {
            continue;
        }
        let dv = v * h;
        let dp = dv / cmd.g_t;
        pose = advance(pose, cmd.curvature, dp);
        virt += dv;
        phys += dp;
    }
    (pose, virt, phys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use std::sync::Arc;

    #[test]
    fn kinematics_examples() {
        let start = Pose::new(Vec2::new(0.0, 0.0), 0.0);
        let (p, v, ph) = simulate_command(
            start,
            &RedirectionCommand::walk(Curvature::Straight, 1.0),
            1.0,
            1.0,
            1.0,
        );
        assert!((p.position.x - 1.0).abs() < 1e-12 && v == 1.0 && ph == 1.0);

        let (p, v, ph) = simulate_command(
            start,
            &RedirectionCommand::walk(Curvature::Straight, 1.26),
            1.0,
            1.26,
            1.26,
        );
        assert!((v - 1.26).abs() < 1e-12 && (ph - 1.0).abs() < 1e-12);
        assert!((p.position.x - 1.0).abs() < 1e-12);

        let arc = 7.5 * FRAC_PI_2;
        let (p, _, _) = simulate_command(
            start,
            &RedirectionCommand::walk(Curvature::Arc(7.5), 1.0),
            1.0,
            arc,
            0.01,
        );
        assert!(wrap_angle(p.heading() - FRAC_PI_2).abs() < 1e-9);
        assert!((p.position.x - 7.5).abs() < 1e-9 && (p.position.y - 7.5).abs() < 1e-9);
    }

    fn setup(method: Method, n: usize, side: f64) -> TrialSetup {
        let env = Arc::new(PhysEnv::rectangle(side, side, 0.2).unwrap());
        let grid = (method == Method::Ours).then(|| {
            Arc::new(
                crate::skeleton::SkeletonGrid::build(&env, &crate::skeleton::SkeletonParams::default())
                    .unwrap(),
            )
        });
        let users = (0..n).map(|_| UserSetup::new(env.clone(), grid.clone())).collect();
        TrialSetup::new(method, users).unwrap()
    }

    #[test]
    fn zero_threshold_ends_immediately() {
        let mut s = setup(Method::S2c, 2, 5.0);
        s.distance_threshold = 0.0;
        let st = run_setup(&s, 3).unwrap();
        assert_eq!(st.common_resets, 0);
        assert_eq!(st.sim_time, 0.0);
    }

    #[test]
    fn huge_room_needs_no_reset() {
        let mut s = setup(Method::S2c, 1, 200.0);
        s.distance_threshold = 50.0;
        let st = run_setup(&s, 11).unwrap();
        assert_eq!(st.common_resets, 0);
        assert!(st.virtual_distances[0] >= 50.0);
    }

    #[test]
    fn baselines_stay_in_free_space() {
        let mut s = setup(Method::Zigzag, 2, 5.0);
        s.distance_threshold = 30.0;
        let mut w = World::new(&s, 5).unwrap();
        while !w.finished() {
            w.step(0.01).unwrap();
            for (u, us) in w.users.iter().zip(&w.setup().users) {
                assert!(us.env.contains(u.physical.position));
            }
        }
        let st = w.into_stats(5, 0);
        assert!(st.common_resets > 0);
        for (v, p) in st.virtual_distances.iter().zip(&st.physical_distances) {
            // baselines never scale translation
            assert!((v - p).abs() < 1e-9 * v.max(1.0));
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mut s = setup(Method::Ours, 2, 5.0);
        s.distance_threshold = 40.0;
        let a = run_setup(&s, 9).unwrap();
        let b = run_setup(&s, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.command_violations, 0, "{:?}", a.violation_messages);
        assert!(a.common_resets > 0);
    }

    #[test]
    fn rejects_bad_dt() {
        let s = setup(Method::S2o, 1, 5.0);
        let mut w = World::new(&s, 0).unwrap();
        assert!(w.step(0.0).is_err());
    }
}
