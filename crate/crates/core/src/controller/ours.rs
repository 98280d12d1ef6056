use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::gaincurve::RedirectionCommand;
use crate::geom::Point2;
use crate::horizon::{t_max_over_orientations, walk_times};
use crate::reach::{reachable_skeleton_positions, ReachableCell};

use super::{
    CommonResetPlan, Planner, Role, SafetyClass, UserAnalysis, UserDecision, UserPlanInput,
};

/// Field values closer than this count as a tie.
const FIELD_TIE_EPS: f64 = 1e-9;

/// Role and time budget assigned before any reach planning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Assignment {
    WalkLongest,
    GotoMaxL { budget: f64 },
    GotoMaxH { budget: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub bottleneck: Option<usize>,
    pub bottleneck_time: f64,
    pub assignments: Vec<Assignment>,
}

/// Picks the bottleneck and budgets from `(id, tau, pi)` triples.
pub fn assign_roles(users: &[(usize, f64, f64)]) -> Schedule {
    let bottleneck = users
        .iter()
        .enumerate()
        .filter(|(_, u)| u.2 < u.1)
        .min_by(|(_, a), (_, b)| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        .map(|(slot, _)| slot);
    let bottleneck_time = bottleneck.map_or(f64::INFINITY, |s| users[s].2);
    let assignments = users
        .iter()
        .enumerate()
        .map(|(slot, &(_, tau, _))| {
            if Some(slot) == bottleneck {
                Assignment::WalkLongest
            } else if tau > bottleneck_time {
                Assignment::GotoMaxL {
                    budget: bottleneck_time,
                }
            } else {
                Assignment::GotoMaxH { budget: tau }
            }
        })
        .collect();
    Schedule {
        bottleneck: bottleneck.map(|s| users[s].0),
        bottleneck_time,
        assignments,
    }
}

fn field_cmp(a: f64, b: f64) -> Ordering {
    if a == b || (a - b).abs() <= FIELD_TIE_EPS {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Highest field value; ties go to the nearest cell, then the lowest index.
fn select_best<'c>(
    cells: &'c [ReachableCell],
    from: Point2,
    value: impl Fn(usize) -> f64,
) -> Option<&'c ReachableCell> {
    cells.iter().reduce(|best, c| {
        let ord = field_cmp(value(c.index), value(best.index))
            .then_with(|| from.dist(best.position).total_cmp(&from.dist(c.position)))
            .then_with(|| best.index.cmp(&c.index));
        if ord == Ordering::Greater {
            c
        } else {
            best
        }
    })
}

impl Planner {
    /// Remaining time to target, best walking time and safety class.
    pub fn analyze(&self, user: &UserPlanInput) -> Result<UserAnalysis> {
        if !(user.speed > 0.0 && user.speed.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "user {} speed must be positive, got {}",
                user.id, user.speed
            )));
        }
        let tau = user.target.dist(user.virtual_position) / user.speed;
        let best = t_max_over_orientations(
            user.physical.position,
            user.speed,
            user.env,
            &self.orientations,
            &self.candidates,
            &self.bounds,
        )?;
        Ok(UserAnalysis {
            tau,
            pi: best.t_max,
            best_reset_heading: best.heading,
            best_curvature: best.report.best.curvature,
            safety_class: if best.t_max >= tau {
                SafetyClass::Safe
            } else {
                SafetyClass::Unsafe
            },
        })
    }

    /// Plans the next common reset for all users.
    pub fn plan_common_reset(&self, users: &[UserPlanInput]) -> Result<CommonResetPlan> {
        if users.is_empty() {
            return Err(Error::InvalidArgument("common reset needs at least one user".into()));
        }
        let analyses = users
            .iter()
            .map(|u| self.analyze(u))
            .collect::<Result<Vec<_>>>()?;
        let triples: Vec<(usize, f64, f64)> = users
            .iter()
            .zip(&analyses)
            .map(|(u, a)| (u.id, a.tau, a.pi))
            .collect();
        let schedule = assign_roles(&triples);

        let decisions = users
            .iter()
            .zip(&analyses)
            .zip(&schedule.assignments)
            .map(|((u, a), assignment)| self.decide(u, a, *assignment))
            .collect();
        Ok(CommonResetPlan {
            bottleneck: schedule.bottleneck,
            bottleneck_time: schedule.bottleneck_time,
            decisions,
        })
    }

    fn decide(&self, user: &UserPlanInput, analysis: &UserAnalysis, a: Assignment) -> UserDecision {
        let fallback = |budget: f64| UserDecision {
            id: user.id,
            role: Role::FallbackLongest,
            command: analysis.longest_walk(&self.bounds),
            budget,
            destination: None,
            analysis: *analysis,
        };
        let (role, budget) = match a {
            Assignment::WalkLongest => {
                return UserDecision {
                    id: user.id,
                    role: Role::WalkLongest,
                    command: analysis.longest_walk(&self.bounds),
                    budget: analysis.pi,
                    destination: None,
                    analysis: *analysis,
                }
            }
            Assignment::GotoMaxL { budget } => (Role::GotoMaxL, budget),
            Assignment::GotoMaxH { budget } => (Role::GotoMaxH, budget),
        };
        let p = user.physical.position;
        let cells = reachable_skeleton_positions(
            p,
            budget,
            user.speed,
            user.env,
            user.grid,
            &self.bounds,
            self.search,
        );
        let grid = user.grid;
        let chosen = match role {
            Role::GotoMaxL => select_best(&cells, p, |i| grid.escapability(i)),
            _ => select_best(&cells, p, |i| grid.safety(i)),
        };
        match chosen {
            Some(cell) => UserDecision {
                id: user.id,
                role,
                command: cell.plan.command,
                budget,
                destination: Some((cell.index, cell.position)),
                analysis: *analysis,
            },
            None => fallback(budget),
        }
    }

    /// Command after a virtual turn: keep the heading, walk the longest candidate.
    pub fn on_turn_complete(&self, user: &UserPlanInput) -> Result<RedirectionCommand> {
        let report = walk_times(
            &user.physical,
            user.speed,
            user.env,
            &self.candidates,
            &self.bounds,
        )?;
        Ok(RedirectionCommand::walk(report.best.curvature, self.bounds.g_t_max))
    }
}
