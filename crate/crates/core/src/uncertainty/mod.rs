//! Scenario data, moments, mode supports, and the estimation procedures
//! that feed the ambiguity sets.

mod assumption;
mod moments;
mod pool;
mod support;

pub use assumption::check_assumption1;
pub use moments::{estimate_moments, MomentData};
pub use pool::ScenarioPool;
pub use support::{build_mode_support, estimate_mode_histogram, ModeSupport, SupportShape};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UncertaintyError {
    #[error("scenario pool is empty")]
    EmptyPool,
    #[error("sample dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("centered covariance is not positive definite (degenerate moments)")]
    DegenerateMoments,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("failed to read scenario pool: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse scenario pool at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Degree of unimodality and the chance-constraint violation budget.
///
/// The reformulations require `alpha >= 1` and `epsilon < 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodalityConfig {
    pub alpha: f64,
    pub epsilon: f64,
}

impl UnimodalityConfig {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self, UncertaintyError> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(UncertaintyError::InvalidConfig(format!(
                "alpha must be a finite value >= 1, got {alpha}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(UncertaintyError::InvalidConfig(format!(
                "epsilon must lie in (0, 0.5), got {epsilon}"
            )));
        }
        Ok(Self { alpha, epsilon })
    }

    /// Smallest admissible value of the cut parameter tau:
    /// `tau0 = (1/(1-epsilon))^(1/alpha)`.
    pub fn tau0(&self) -> f64 {
        (1.0 / (1.0 - self.epsilon)).powf(1.0 / self.alpha)
    }
}
