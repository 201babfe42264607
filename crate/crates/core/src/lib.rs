//! Throughput-maximizing slot scheduling and power control for concurrent
//! one-hop multicast sessions under the SINR (physical) interference model.
//!
//! The crate is layered bottom-up:
//!
//! * [`net`] describes the network: sources, multicast groups, path-loss
//!   gains and SINR evaluation.
//! * [`lp`] is a dense revised simplex solver for bounded linear programs.
//! * [`milp`] is an exact best-first branch-and-bound over binary variables.
//! * [`model`] compiles a network plus scheduling parameters into the
//!   group-activation, link-activation, constant-power and unicast programs
//!   and decodes solutions into [`Schedule`]s.
//! * [`rounding`] is the LP-relaxation rounding heuristic for the
//!   power-controlled link-activation program.
//! * [`verify`] audits schedules against the physical model directly and
//!   enumerates exact optima on tiny instances.
//! * [`experiment`] runs seeded Monte-Carlo sweeps and writes CSV.

pub mod error;
pub mod experiment;
pub mod io;
pub mod lp;
pub mod milp;
pub mod model;
pub mod net;
pub mod rounding;
pub mod verify;

pub use error::{Error, Result};
pub use lp::{LpProblem, LpSolution, LpStatus, Relation, Row};
pub use milp::{MilpOptions, MilpProblem, MilpSolution, MilpStatus};
pub use model::{BigM, Demand, FormulationKind, SchedParams, Schedule, VarKind, VarMap};
pub use net::{ConflictGraph, InstanceConfig, NetworkInstance};
pub use verify::VerificationReport;
