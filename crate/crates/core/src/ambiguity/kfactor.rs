//! Constants K for the single-cut ambiguity sets, all entering through
//! `K sqrt(a(x)' cov a(x)) <= b(x) - mu' a(x)`.

use super::AmbiguityError;
use crate::uncertainty::UnimodalityConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KFactorKind {
    /// Moment information only.
    D1,
    /// Moments + alpha-unimodality with mode at the mean.
    D4,
    /// Moments + 1-unimodality with arbitrary mode (valid for eps <= 1/6).
    D5,
}

pub(super) fn validate_d5(uni: &UnimodalityConfig) -> Result<(), AmbiguityError> {
    if (uni.alpha - 1.0).abs() > 1e-12 {
        return Err(AmbiguityError::UnsupportedRegime(format!(
            "the arbitrary-mode set is defined for alpha = 1, got {}",
            uni.alpha
        )));
    }
    if uni.epsilon > 1.0 / 6.0 + 1e-12 {
        return Err(AmbiguityError::UnsupportedRegime(format!(
            "the arbitrary-mode constant requires epsilon <= 1/6, got {}",
            uni.epsilon
        )));
    }
    Ok(())
}

/// The cut constant for the single-cut sets.
///
/// * D1: `sqrt((1-eps)/eps)`.
/// * D4: `sqrt((alpha+2)/alpha) * max over tau >= tau0 of g(tau)/tau`, with
///   the interior maximizer `tau* = ((alpha+2)/(2(1-eps)))^(1/alpha)`
///   (always >= tau0 for alpha >= 1; clamped anyway).
/// * D5: `sqrt(4/(9 eps) - 1)` (one-sided Vysochanskij-Petunin-type bound).
pub fn k_factor(kind: KFactorKind, uni: &UnimodalityConfig) -> Result<f64, AmbiguityError> {
    let eps = uni.epsilon;
    match kind {
        KFactorKind::D1 => Ok(((1.0 - eps) / eps).sqrt()),
        KFactorKind::D4 => {
            let alpha = uni.alpha;
            let tau_star = (((alpha + 2.0) / (2.0 * (1.0 - eps))).powf(1.0 / alpha)).max(uni.tau0());
            let g = ((1.0 - eps - tau_star.powf(-alpha)) / eps).max(0.0).sqrt();
            Ok(((alpha + 2.0) / alpha).sqrt() * g / tau_star)
        }
        KFactorKind::D5 => {
            validate_d5(uni)?;
            Ok((4.0 / (9.0 * eps) - 1.0).sqrt())
        }
    }
}
