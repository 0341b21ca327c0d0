//! Problem data for the cutting-plane solve.

use super::MasterError;
use crate::ambiguity::{AmbiguityConfig, UncertainRow};
use crate::uncertainty::{check_assumption1, ModeSupport, MomentData};
use nalgebra::{DMatrix, DVector};

/// `x' Q x + c' x + constant` with Q symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuadObjective {
    pub quad: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
}

impl QuadObjective {
    pub fn linear_only(linear: DVector<f64>) -> Self {
        let l = linear.len();
        Self { quad: DMatrix::zeros(l, l), linear, constant: 0.0 }
    }

    pub fn value_at(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.quad * x)[(0, 0)] + self.linear.dot(x) + self.constant
    }
}

/// One chance-constrained row together with its ambiguity configuration.
#[derive(Debug, Clone)]
pub struct UncertainSpec {
    pub row: UncertainRow,
    pub config: AmbiguityConfig,
    pub moments: MomentData,
    /// Mode-feasibility constraints enforced for this row. Defaults to the
    /// config's own support for the separated sets; single-cut sets carry
    /// none unless one is supplied for cross-set comparability.
    pub mode_feasibility: Option<ModeSupport>,
}

impl UncertainSpec {
    pub fn new(row: UncertainRow, config: AmbiguityConfig, moments: MomentData) -> Self {
        let mode_feasibility = config.kind.support();
        Self { row, config, moments, mode_feasibility }
    }

    pub fn with_mode_feasibility(mut self, support: Option<ModeSupport>) -> Self {
        self.mode_feasibility = support;
        self
    }
}

/// Convex-quadratic objective, deterministic affine constraints, and
/// chance-constrained rows.
#[derive(Debug, Clone)]
pub struct DrccProblem {
    pub num_vars: usize,
    pub objective: QuadObjective,
    /// Rows `coeffs . x = rhs`.
    pub eqs: Vec<(DVector<f64>, f64)>,
    /// Rows `coeffs . x <= rhs`.
    pub ineqs: Vec<(DVector<f64>, f64)>,
    pub uncertain: Vec<UncertainSpec>,
}

impl DrccProblem {
    pub fn new(num_vars: usize, objective: QuadObjective) -> Self {
        Self { num_vars, objective, eqs: Vec::new(), ineqs: Vec::new(), uncertain: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), MasterError> {
        let l = self.num_vars;
        if self.objective.linear.len() != l || self.objective.quad.nrows() != l {
            return Err(MasterError::Invalid("objective dimension mismatch".into()));
        }
        if crate::linalg::sym_sqrt(&self.objective.quad).is_none() {
            return Err(MasterError::Invalid(
                "objective quadratic part is not positive semidefinite".into(),
            ));
        }
        for (c, _) in self.eqs.iter().chain(self.ineqs.iter()) {
            if c.len() != l {
                return Err(MasterError::Invalid("constraint dimension mismatch".into()));
            }
        }
        for (i, spec) in self.uncertain.iter().enumerate() {
            if spec.row.decision_dim() != l {
                return Err(MasterError::Invalid(format!(
                    "uncertain row {i} has decision dimension {} (expected {l})",
                    spec.row.decision_dim()
                )));
            }
            if spec.row.uncertainty_dim() != spec.moments.dim() {
                return Err(MasterError::Invalid(format!(
                    "uncertain row {i}: uncertainty dimension {} does not match moments {}",
                    spec.row.uncertainty_dim(),
                    spec.moments.dim()
                )));
            }
            if let Some(support) = spec.config.kind.support() {
                if !check_assumption1(&spec.moments, &support, spec.config.unimodality.alpha) {
                    return Err(MasterError::Invalid(format!(
                        "uncertain row {i}: ambiguity set is empty for part of the mode support \
                         (nonemptiness check failed)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Initial mode for cut generation: the fixed mode for point supports,
    /// the lexicographically smallest vertex for rectangles, the center for
    /// ellipsoids.
    pub(crate) fn initial_mode(support: &ModeSupport) -> DVector<f64> {
        match support {
            ModeSupport::Point { m } => m.clone(),
            ModeSupport::Rectangle { lo, .. } => lo.clone(),
            ModeSupport::Ellipsoid { center, .. } => center.clone(),
        }
    }
}

/// Accumulated cut parameters per uncertain row.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    per_row: Vec<Vec<(f64, DVector<f64>)>>,
}

impl CutPool {
    pub fn new(num_rows: usize) -> Self {
        Self { per_row: vec![Vec::new(); num_rows] }
    }

    pub fn row(&self, idx: usize) -> &[(f64, DVector<f64>)] {
        &self.per_row[idx]
    }

    pub fn total(&self) -> usize {
        self.per_row.iter().map(Vec::len).sum()
    }

    /// Adds (tau, m) unless an entry within 1e-9 in both tau and mode
    /// already exists; returns whether the cut was added. Rejection marks
    /// the row as converged at solver tolerance, preventing stalls.
    pub fn try_add(&mut self, row: usize, tau: f64, mode: DVector<f64>) -> bool {
        const DEDUP_TOL: f64 = 1e-9;
        let duplicate = self.per_row[row]
            .iter()
            .any(|(t, m)| (t - tau).abs() <= DEDUP_TOL && (m - &mode).amax() <= DEDUP_TOL);
        if duplicate {
            return false;
        }
        self.per_row[row].push((tau, mode));
        true
    }
}
