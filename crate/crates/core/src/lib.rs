//! Planar pushing simulator and sampling-based Riemannian motion predictive control.
//!
//! The crate is organised bottom-up:
//!
//! * [`types`]: poses, objects, scenes, tasks and actions.
//! * [`physics`]: deterministic rigid-body stepping used both as the executing
//!   world and as the look-ahead model of the predictive planner.
//! * [`rmp`]: local motion policies, metric-weighted resolve and the closed-loop
//!   pushing controller.
//! * [`reward`]: per-step progress/collision reward and its discounted sum.
//! * [`planners`]: RMPC and the RMP, MPC, open-loop and direct baselines.
//! * [`scenegen`] and [`scene_file`]: seeded scene generation and the text format.
//! * [`eval`]: episode runner, collision-ratio metrics and CSV reports.
//! * [`config`]: flat `key = value` settings shared by the CLI and the examples.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod physics;
pub mod planners;
pub mod reward;
pub mod rmp;
pub mod scene_file;
pub mod scenegen;
pub mod types;
