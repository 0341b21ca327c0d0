//! DC optimal power flow with wind uncertainty: case parsing, PTDF
//! computation, and construction of the chance-constrained reserve
//! scheduling problem.

mod build;
mod case;
mod network;
mod ptdf;

pub use build::{
    build_deterministic, build_problem, decode_decision, BuiltOpf, OpfDecision, OpfOptions,
};
pub use case::parse_case;
pub use network::{Branch, Bus, CaseOverrides, Generator, LineLimitOverride, Network, WindPlant};
pub use ptdf::{compute_ptdf, solve_dc_flow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DcopfError {
    #[error("failed to read case file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid network: {0}")]
    Validation(String),
    #[error("susceptance matrix is singular (network disconnected?)")]
    SingularSusceptance,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
