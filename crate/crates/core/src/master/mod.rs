//! Cutting-plane driver: iteratively solve a relaxed conic master problem,
//! run the worst-case separation per uncertain row, add violated cuts, and
//! terminate once no row is violated beyond tolerance.

mod assemble;
mod problem;
mod solve;

pub use assemble::assemble_master;
pub use problem::{CutPool, DrccProblem, QuadObjective, UncertainSpec};
pub use solve::{solve_drcc, IterationStat, SolveOptions, SolveReport};

use crate::ambiguity::AmbiguityError;
use crate::conic::SolverError;
use crate::separation::SeparationError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MasterError {
    #[error("problem validation failed: {0}")]
    Invalid(String),
    #[error("master problem is infeasible")]
    Infeasible,
    #[error("master problem is unbounded")]
    Unbounded,
    #[error("conic solver failed: {0}")]
    Solver(String),
    #[error("iteration limit exceeded (residual violation {residual:.3e})")]
    IterationLimit { residual: f64, report: Box<SolveReport> },
    #[error("cut construction failed: {0}")]
    Ambiguity(#[from] AmbiguityError),
    #[error("separation failed on row {row}: {source}")]
    Separation { row: usize, source: SeparationError },
}

impl From<SolverError> for MasterError {
    fn from(e: SolverError) -> Self {
        MasterError::Solver(e.to_string())
    }
}
