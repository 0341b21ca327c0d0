//! Cut construction: the moment-only single cut, the (tau, mode)-indexed
//! cut family for unimodal sets, and the deterministic mode-feasibility
//! constraints.

use super::row::{SocCut, UncertainRow};
use super::AmbiguityError;
use crate::linalg::sym_sqrt;
use crate::uncertainty::{ModeSupport, MomentData, UnimodalityConfig};
use nalgebra::DVector;

/// Moment-only cut:
/// `sqrt((1-eps)/eps) ||C' a(x)|| <= b(x) - mu' a(x)` with `C C' = cov`.
pub fn cut_d1(
    moments: &MomentData,
    epsilon: f64,
    row: &UncertainRow,
) -> Result<SocCut, AmbiguityError> {
    scaled_covariance_cut(moments, ((1.0 - epsilon) / epsilon).sqrt(), row)
}

/// Single cut `K ||C' a(x)|| <= b(x) - mu' a(x)` for a given constant K.
pub fn scaled_covariance_cut(
    moments: &MomentData,
    k: f64,
    row: &UncertainRow,
) -> Result<SocCut, AmbiguityError> {
    let chol = moments
        .centered_covariance()
        .cholesky()
        .ok_or(AmbiguityError::DegenerateMoments)?;
    let factor = chol.l().transpose() * k;
    let mu = moments.mu();
    Ok(SocCut {
        lhs_lin: &factor * &row.a_lin,
        lhs_const: &factor * &row.a_const,
        rhs_lin: &row.b_lin - row.a_lin.transpose() * mu,
        rhs_const: row.b_const - mu.dot(&row.a_const),
    })
}

/// One member of the cut family for unimodal sets at parameters (tau, m):
///
/// `g(tau) ||Lambda a(x)|| <= tau (b(x) - mu' a(x)) + (tau - (alpha+1)/alpha) (mu-m)' a(x)`
///
/// with `g(tau) = sqrt((1-eps-tau^-alpha)/eps)` and `Lambda` the symmetric
/// square root of `((alpha+2)/alpha) cov - (1/alpha^2)(mu-m)(mu-m)'`.
pub fn cut_d2_at(
    moments: &MomentData,
    mode: &DVector<f64>,
    uni: &UnimodalityConfig,
    tau: f64,
    row: &UncertainRow,
) -> Result<SocCut, AmbiguityError> {
    let tau0 = uni.tau0();
    if tau < tau0 * (1.0 - 1e-12) {
        return Err(AmbiguityError::InvalidTau { tau, tau0 });
    }
    let alpha = uni.alpha;
    let d = moments.mu() - mode;
    let m = moments.centered_covariance() * ((alpha + 2.0) / alpha)
        - (&d * d.transpose()) / (alpha * alpha);
    let lambda = sym_sqrt(&m).ok_or(AmbiguityError::Assumption1Violated)?;

    // Snap the coefficient to exact zero at tau0, where the radicand is
    // pure rounding noise; the cut then degenerates to a linear row.
    let radicand = (1.0 - uni.epsilon - tau.powf(-alpha)) / uni.epsilon;
    let g = if radicand < 1e-14 { 0.0 } else { radicand.sqrt() };
    let lhs = lambda * g;

    let shift = tau - (alpha + 1.0) / alpha;
    let mu = moments.mu();
    Ok(SocCut {
        lhs_lin: &lhs * &row.a_lin,
        lhs_const: &lhs * &row.a_const,
        rhs_lin: &row.b_lin * tau + row.a_lin.transpose() * (&d * shift - mu * tau),
        rhs_const: tau * (row.b_const - mu.dot(&row.a_const)) + shift * d.dot(&row.a_const),
    })
}

/// Deterministic constraints enforcing `a(x)' m <= b(x)` for every m in the
/// support.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeFeasibility {
    /// Single linear row `coeffs' x <= rhs` (point supports).
    Linear { coeffs: DVector<f64>, rhs: f64 },
    /// Rectangle: `a(x)' center + t' half <= b(x)` with auxiliary
    /// variables `t >= a(x)`, `t >= -a(x)` supplied by the master model.
    BoxLinearized { center: DVector<f64>, half: DVector<f64> },
    /// Ellipsoid: a single second-order cone constraint.
    Soc(SocCut),
}

pub fn mode_feasibility_constraints(support: &ModeSupport, row: &UncertainRow) -> ModeFeasibility {
    match support {
        ModeSupport::Point { m } => ModeFeasibility::Linear {
            coeffs: row.a_lin.transpose() * m - &row.b_lin,
            rhs: row.b_const - m.dot(&row.a_const),
        },
        ModeSupport::Rectangle { lo, hi } => ModeFeasibility::BoxLinearized {
            center: (lo + hi) * 0.5,
            half: (hi - lo) * 0.5,
        },
        ModeSupport::Ellipsoid { center, shape } => {
            let sqrt = sym_sqrt(shape).expect("shape validated PD at construction");
            ModeFeasibility::Soc(SocCut {
                lhs_lin: &sqrt * &row.a_lin,
                lhs_const: &sqrt * &row.a_const,
                rhs_lin: &row.b_lin - row.a_lin.transpose() * center,
                rhs_const: row.b_const - center.dot(&row.a_const),
            })
        }
    }
}
