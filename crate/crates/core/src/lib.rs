//! Planning and simulation for multi-user redirected walking in separate
//! physical rooms.
//!
//! Each user walks toward targets in a shared virtual world while a controller
//! bends and scales their physical path with curvature and translation gains.
//! When any user would leave their room's free space, every user pauses and
//! resets together. The `ours` controller plans those common resets ahead of
//! time; `s2c`, `s2o` and `zigzag` are steering baselines.
//!
//! Module map:
//! - [`geom`]: rooms, poses, first-hit queries on lines and arcs
//! - [`gaincurve`]: gain bounds, curvature candidates, command validation
//! - [`horizon`]: walking time before an obstacle from a pose
//! - [`reach`]: where a user can be steered to in a given time
//! - [`skeleton`]: precomputed escapability/safety fields with a disk cache
//! - [`controller`]: the coordinated reset planner and the baselines
//! - [`sim`]: deterministic multi-user trials
//! - [`stats`]: Mann-Whitney U and summary statistics

pub mod controller;
pub mod error;
pub mod gaincurve;
pub mod geom;
pub mod horizon;
pub mod reach;
pub mod sim;
pub mod skeleton;
pub mod stats;

pub use error::{Error, Result};
