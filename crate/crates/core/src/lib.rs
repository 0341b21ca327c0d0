//! Distributionally robust chance-constrained (DRCC) optimization under
//! moment + unimodality ambiguity sets with misspecified mode locations.
//!
//! The library provides:
//!
//! * [`uncertainty`] — scenario pools, moment/mode estimation, mode supports,
//!   and the ambiguity-set nonemptiness check.
//! * [`ambiguity`] — second-order cone reformulations: the closed-form
//!   single-cut sets (moment-only and fixed-mode variants) and the parametric
//!   cut family for misspecified modes.
//! * [`separation`] — the analytic worst-case oracle that finds the most
//!   violated cut parameters for a candidate solution, plus a brute-force
//!   verification oracle.
//! * [`master`] — the cutting-plane driver: solve a relaxed conic master,
//!   separate, add cuts, repeat to global optimality.
//! * [`dcopf`] — DC optimal power flow model construction from case files
//!   (PTDF, objective, deterministic and uncertain rows).
//! * [`experiment`] — synthetic data generation, end-to-end runs across
//!   ambiguity sets, and out-of-sample reliability evaluation.
//!
//! Entry point for most users is [`experiment::run_experiment`] driven by a
//! TOML config, or [`master::solve_drcc`] for a hand-built problem.

pub mod ambiguity;
pub mod conic;
pub mod dcopf;
pub mod experiment;
pub mod linalg;
pub mod master;
pub mod roots;
pub mod separation;
pub mod uncertainty;

pub use ambiguity::{AmbiguityConfig, AmbiguityKind, SocCut, UncertainRow};
pub use master::{solve_drcc, DrccProblem, SolveOptions, SolveReport};
pub use separation::{SeparationInstance, WorstCase};
pub use uncertainty::{ModeSupport, MomentData, ScenarioPool, UnimodalityConfig};
