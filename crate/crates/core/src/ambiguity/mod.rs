//! Second-order cone constraint data for each ambiguity set: closed-form
//! single cuts for the moment-only and fixed-mode-at-mean sets, and the
//! parametric cut family indexed by (tau, mode) for unimodal sets with
//! fixed or misspecified modes.

mod cuts;
mod kfactor;
mod row;

pub use cuts::{
    cut_d1, cut_d2_at, mode_feasibility_constraints, scaled_covariance_cut, ModeFeasibility,
};
pub use kfactor::{k_factor, KFactorKind};
pub use row::{SocCut, UncertainRow};

use crate::uncertainty::{ModeSupport, UnimodalityConfig};
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AmbiguityError {
    #[error("centered covariance is not positive definite")]
    DegenerateMoments,
    #[error("tau = {tau} is below the admissible minimum tau0 = {tau0}")]
    InvalidTau { tau: f64, tau0: f64 },
    #[error("ambiguity set is empty at the given mode (nonemptiness assumption violated)")]
    Assumption1Violated,
    #[error("constant not valid in this regime: {0}")]
    UnsupportedRegime(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Which ambiguity set a chance-constrained row is enforced under.
///
/// * `D1` — first and second moments only.
/// * `D2` — moments + alpha-unimodality with a fixed mode location.
/// * `D3` — moments + alpha-unimodality with the mode anywhere in a support set.
/// * `D4` — moments + alpha-unimodality with the mode fixed at the mean.
/// * `D5` — moments + 1-unimodality with an arbitrary mode.
#[derive(Debug, Clone, PartialEq)]
pub enum AmbiguityKind {
    D1,
    D2 { mode: DVector<f64> },
    D3 { support: ModeSupport },
    D4,
    D5,
}

impl AmbiguityKind {
    pub fn label(&self) -> &'static str {
        match self {
            AmbiguityKind::D1 => "D1",
            AmbiguityKind::D2 { .. } => "D2",
            AmbiguityKind::D3 { .. } => "D3",
            AmbiguityKind::D4 => "D4",
            AmbiguityKind::D5 => "D5",
        }
    }

    /// The mode support the set constrains (None for D1/D5, where any mode
    /// is admissible, and for D4, which pins the mode at the mean).
    pub fn support(&self) -> Option<ModeSupport> {
        match self {
            AmbiguityKind::D2 { mode } => Some(ModeSupport::point(mode.clone())),
            AmbiguityKind::D3 { support } => Some(support.clone()),
            _ => None,
        }
    }

    /// True for the sets solved by cut generation rather than a single cut.
    pub fn needs_separation(&self) -> bool {
        matches!(self, AmbiguityKind::D2 { .. } | AmbiguityKind::D3 { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityConfig {
    pub kind: AmbiguityKind,
    pub unimodality: UnimodalityConfig,
}

impl AmbiguityConfig {
    pub fn new(kind: AmbiguityKind, unimodality: UnimodalityConfig) -> Result<Self, AmbiguityError> {
        if matches!(kind, AmbiguityKind::D5) {
            kfactor::validate_d5(&unimodality)?;
        }
        Ok(Self { kind, unimodality })
    }
}
