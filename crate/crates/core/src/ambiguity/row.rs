//! Uncertain constraint rows `a(x)' xi <= b(x)` with affine maps a, b, and
//! the second-order cone cut representation produced from them.

use super::AmbiguityError;
use nalgebra::{DMatrix, DVector};

/// An uncertain row `a(x)' xi <= b(x)`.
///
/// `a(x) = a_lin x + a_const` maps the decision vector (dimension l) to an
/// n-vector; `b(x) = b_lin' x + b_const` to a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainRow {
    pub a_lin: DMatrix<f64>,
    pub a_const: DVector<f64>,
    pub b_lin: DVector<f64>,
    pub b_const: f64,
}

impl UncertainRow {
    pub fn new(
        a_lin: DMatrix<f64>,
        a_const: DVector<f64>,
        b_lin: DVector<f64>,
        b_const: f64,
    ) -> Result<Self, AmbiguityError> {
        if a_lin.nrows() != a_const.len() {
            return Err(AmbiguityError::DimensionMismatch {
                expected: a_lin.nrows(),
                got: a_const.len(),
            });
        }
        if a_lin.ncols() != b_lin.len() {
            return Err(AmbiguityError::DimensionMismatch {
                expected: a_lin.ncols(),
                got: b_lin.len(),
            });
        }
        Ok(Self { a_lin, a_const, b_lin, b_const })
    }

    /// A row with constant a (no dependence on x), useful in tests.
    pub fn constant(a: DVector<f64>, b: f64, num_vars: usize) -> Self {
        let n = a.len();
        Self {
            a_lin: DMatrix::zeros(n, num_vars),
            a_const: a,
            b_lin: DVector::zeros(num_vars),
            b_const: b,
        }
    }

    /// Uncertainty dimension n.
    pub fn uncertainty_dim(&self) -> usize {
        self.a_const.len()
    }

    /// Decision dimension l.
    pub fn decision_dim(&self) -> usize {
        self.b_lin.len()
    }

    pub fn a_at(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a_lin * x + &self.a_const
    }

    pub fn b_at(&self, x: &DVector<f64>) -> f64 {
        self.b_lin.dot(x) + self.b_const
    }
}

/// One second-order cone constraint `||L x + l|| <= r' x + r0` in the
/// decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SocCut {
    pub lhs_lin: DMatrix<f64>,
    pub lhs_const: DVector<f64>,
    pub rhs_lin: DVector<f64>,
    pub rhs_const: f64,
}

impl SocCut {
    /// Left-hand side vector at x.
    pub fn lhs_at(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.lhs_lin * x + &self.lhs_const
    }

    /// Right-hand side value at x.
    pub fn rhs_at(&self, x: &DVector<f64>) -> f64 {
        self.rhs_lin.dot(x) + self.rhs_const
    }

    /// `||lhs|| - rhs` at x; positive means the cut is violated.
    pub fn violation_at(&self, x: &DVector<f64>) -> f64 {
        self.lhs_at(x).norm() - self.rhs_at(x)
    }

    /// True when the matrix part is identically zero, i.e. the cut
    /// degenerates to the linear constraint `0 <= rhs(x)`.
    pub fn lhs_is_zero(&self) -> bool {
        self.lhs_lin.amax() == 0.0 && self.lhs_const.amax() == 0.0
    }
}
