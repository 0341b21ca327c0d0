//! Solver-facing conic model: linear objective, affine rows grouped into
//! zero / nonnegative / second-order cone blocks, and an adapter trait so
//! the cutting-plane driver stays solver-agnostic.

mod clarabel_adapter;
mod model;

pub use clarabel_adapter::ClarabelSolver;
pub use model::{dense_to_sparse, BlockKind, ConeBlock, ConicModel, ModelBuilder};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver setup failed: {0}")]
    Setup(String),
    #[error("solver reported numerical failure: {0}")]
    Numerical(String),
}

/// Terminal status of one conic solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Anything that can solve a [`ConicModel`]: accepts a linear objective,
/// linear equality/inequality rows, and second-order cone rows; returns a
/// status, a primal point, and the objective value.
pub trait ConicSolver {
    fn solve(&self, model: &ConicModel) -> Result<ConicSolution, SolverError>;
}
