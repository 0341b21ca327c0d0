//! Worst-case separation: given the scalarized data of one uncertain row at
//! a candidate solution, find the cut parameters (tau, mode) with the
//! largest constraint violation.
//!
//! For a row with vector a = a(x*), the cut family reduces to the scalar
//! inequality
//!
//! ```text
//! g(tau) sqrt(R~^2 - h^2) + f(tau) h - c~ tau <= 0
//! ```
//!
//! over tau >= tau0 and h in [h_lo, h_hi], where h = a'(mu - m)/alpha ranges
//! over the mode support, c~ = b(x*) - mu'a(x*), R~ is the scaled covariance
//! norm of a, g(tau) = sqrt((1-eps-tau^-alpha)/eps), and
//! f(tau) = -(alpha tau - alpha - 1). The left side is neither convex nor
//! concave jointly, but for fixed tau the inner maximum over h is explicit,
//! and its location is strictly decreasing in tau. That splits the tau axis
//! into three intervals (h pinned at h_hi, h interior, h pinned at h_lo) on
//! which one-dimensional monotonicity and curvature certificates locate the
//! maximum with bracketed bisection only.

mod brute;
mod recover;
mod worst;

pub use brute::brute_force_worst_case;
pub use recover::{h_range, recover_mode};
pub use worst::{h_hat_crossing_bound, tail_search_bound, tau_bracket, worst_case};

use crate::uncertainty::UnimodalityConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeparationError {
    #[error("invalid separation instance: {0}")]
    InvalidInstance(String),
    #[error("argument outside domain: {0}")]
    DomainError(String),
}

/// Scalarized per-row data on which the worst-case (tau, h) search runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationInstance {
    pub alpha: f64,
    pub epsilon: f64,
    /// `sqrt(a' ((alpha+2)/alpha) (Sigma - mu mu') a)`, strictly positive.
    pub r_tilde: f64,
    /// `b(x*) - mu' a(x*)`; at least `-alpha * h_lo` (mode feasibility).
    pub c_tilde: f64,
    pub h_lo: f64,
    pub h_hi: f64,
}

impl SeparationInstance {
    /// Validates the instance invariants:
    /// `h_lo <= h_hi`, `[h_lo, h_hi]` strictly inside `(-R~, R~)`, and
    /// `c~ >= -alpha h_lo` (up to solver-noise slack, after which `c~` is
    /// clamped to the bound so that downstream case analysis sees an exact
    /// inequality).
    pub fn new(
        uni: &UnimodalityConfig,
        r_tilde: f64,
        c_tilde: f64,
        h_lo: f64,
        h_hi: f64,
    ) -> Result<Self, SeparationError> {
        if !(r_tilde > 0.0 && r_tilde.is_finite()) {
            return Err(SeparationError::InvalidInstance(format!(
                "R~ must be positive and finite, got {r_tilde}"
            )));
        }
        if h_lo > h_hi {
            return Err(SeparationError::InvalidInstance(format!(
                "h_lo = {h_lo} exceeds h_hi = {h_hi}"
            )));
        }
        if h_hi >= r_tilde || h_lo <= -r_tilde {
            return Err(SeparationError::InvalidInstance(format!(
                "[{h_lo}, {h_hi}] must lie strictly inside (-{r_tilde}, {r_tilde}); \
                 the ambiguity set is empty at some admissible mode"
            )));
        }
        // Master iterates satisfy mode feasibility only to solver
        // tolerance; accept that much noise, then clamp to the exact bound.
        let slack = 1e-7 * r_tilde.max(1.0);
        if c_tilde < -uni.alpha * h_lo - slack {
            return Err(SeparationError::InvalidInstance(format!(
                "c~ = {c_tilde} < -alpha h_lo = {}; mode feasibility is violated",
                -uni.alpha * h_lo
            )));
        }
        Ok(Self {
            alpha: uni.alpha,
            epsilon: uni.epsilon,
            r_tilde,
            c_tilde: c_tilde.max(-uni.alpha * h_lo),
            h_lo,
            h_hi,
        })
    }

    pub fn tau0(&self) -> f64 {
        (1.0 / (1.0 - self.epsilon)).powf(1.0 / self.alpha)
    }

    /// `g(tau) = sqrt((1 - eps - tau^-alpha)/eps)`; the radicand is clamped
    /// at zero so rounding just below tau0 cannot produce NaN.
    pub fn g(&self, tau: f64) -> f64 {
        (((1.0 - self.epsilon - tau.powf(-self.alpha)) / self.epsilon).max(0.0)).sqrt()
    }

    /// `f(tau) = -(alpha tau - alpha - 1)`.
    pub fn f(&self, tau: f64) -> f64 {
        self.alpha + 1.0 - self.alpha * tau
    }

    /// Violation of the scalarized cut at (h, tau):
    /// `g(tau) sqrt(R~^2 - h^2) + f(tau) h - c~ tau`.
    pub fn violation(&self, h: f64, tau: f64) -> Result<f64, SeparationError> {
        if tau < self.tau0() * (1.0 - 1e-12) {
            return Err(SeparationError::DomainError(format!(
                "tau = {tau} below tau0 = {}",
                self.tau0()
            )));
        }
        if h.abs() > self.r_tilde * (1.0 + 1e-12) {
            return Err(SeparationError::DomainError(format!(
                "|h| = {} exceeds R~ = {}",
                h.abs(),
                self.r_tilde
            )));
        }
        Ok(self.violation_unchecked(h, tau))
    }

    #[inline]
    pub(crate) fn violation_unchecked(&self, h: f64, tau: f64) -> f64 {
        let root = (self.r_tilde * self.r_tilde - h * h).max(0.0).sqrt();
        self.g(tau) * root + self.f(tau) * h - self.c_tilde * tau
    }

    /// Maximizer of the violation over h in [-R~, R~] at fixed tau:
    /// `h_hat(tau) = f(tau)/sqrt(g^2 + f^2) * R~`, strictly decreasing.
    pub fn h_hat(&self, tau: f64) -> f64 {
        let g = self.g(tau);
        let f = self.f(tau);
        f / (g * g + f * f).sqrt() * self.r_tilde
    }

    /// `q = g^2 + f^2` and derivatives; strictly positive on [tau0, inf).
    #[inline]
    pub(crate) fn q(&self, tau: f64) -> f64 {
        let g2 = (1.0 - self.epsilon - tau.powf(-self.alpha)) / self.epsilon;
        let f = self.f(tau);
        g2 + f * f
    }

    #[inline]
    pub(crate) fn q_prime(&self, tau: f64) -> f64 {
        let a = self.alpha;
        a / self.epsilon * tau.powf(-a - 1.0) - 2.0 * a * self.f(tau)
    }

    #[inline]
    pub(crate) fn q_second(&self, tau: f64) -> f64 {
        let a = self.alpha;
        -a * (a + 1.0) / self.epsilon * tau.powf(-a - 2.0) + 2.0 * a * a
    }

    /// `g'(tau)`; +inf where g vanishes (at tau0), which bisection treats
    /// as a positive sign.
    #[inline]
    pub(crate) fn g_prime(&self, tau: f64) -> f64 {
        let a = self.alpha;
        a / self.epsilon * tau.powf(-a - 1.0) / (2.0 * self.g(tau))
    }
}

/// The worst-case cut parameters for one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    /// Maximizing tau (for `at_supremum`, a finite emission point whose
    /// violation is within 1e-6 of the supremum).
    pub tau: f64,
    /// Maximizing h in [h_lo, h_hi].
    pub h: f64,
    /// Maximum violation value; a cut exists when this is positive.
    pub violation: f64,
    /// True when the maximum is only approached as tau -> inf
    /// (`c~ + alpha h_lo = 0`); `violation` then holds the supremum.
    pub at_supremum: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn witness_instance() -> SeparationInstance {
        let uni = UnimodalityConfig::new(1.0, 0.05).unwrap();
        SeparationInstance::new(&uni, 1.0, 0.0, 0.0, 0.9).unwrap()
    }

    #[test]
    fn violation_matches_printed_triples() {
        // (h, tau) -> value pairs for alpha=1, eps=0.05, R~=1, c~=0.
        let inst = witness_instance();
        let cases = [
            (0.1, 2.0, 2.985),
            (0.3, 3.0, 3.05),
            (0.2, 2.5, 3.15),
            (0.4, 11.0, 0.1990),
            (0.6, 10.0, -1.5015),
            (0.5, 10.5, -0.6693),
        ];
        for (h, tau, v) in cases {
            assert_relative_eq!(inst.violation(h, tau).unwrap(), v, epsilon = 5e-4);
        }
    }

    #[test]
    fn non_convexity_witness() {
        // Midpoint above the chord on one segment (not concave) and below
        // on another (not convex).
        let inst = witness_instance();
        let v = |h: f64, t: f64| inst.violation(h, t).unwrap();
        let chord1 = 0.5 * (v(0.1, 2.0) + v(0.3, 3.0));
        assert!(v(0.2, 2.5) > chord1);
        assert_relative_eq!(chord1, 3.0175, epsilon = 5e-4);
        let chord2 = 0.5 * (v(0.4, 11.0) + v(0.6, 10.0));
        assert!(v(0.5, 10.5) < chord2);
        assert_relative_eq!(chord2, -0.65125, epsilon = 5e-4);
    }

    #[test]
    fn h_hat_endpoints_and_monotonicity() {
        let inst = witness_instance();
        assert_relative_eq!(inst.h_hat(inst.tau0()), 1.0, epsilon = 1e-12);
        assert_relative_eq!(inst.h_hat(2.0), 0.0, epsilon = 1e-12); // (alpha+1)/alpha = 2
        assert_relative_eq!(inst.h_hat(1e6), -1.0, epsilon = 1e-5);
        let mut prev = inst.h_hat(inst.tau0());
        for i in 1..300 {
            let tau = inst.tau0() + i as f64 * 0.05;
            let cur = inst.h_hat(tau);
            assert!(cur < prev, "h_hat not strictly decreasing at tau={tau}");
            prev = cur;
        }
    }

    #[test]
    fn inner_maximum_over_h_equals_envelope() {
        // max over h in [-R~, R~] at fixed tau is R~ sqrt(g^2+f^2) - c~ tau,
        // attained at h_hat.
        let uni = UnimodalityConfig::new(2.0, 0.1).unwrap();
        let inst = SeparationInstance::new(&uni, 2.5, 1.0, -0.5, 2.0).unwrap();
        for tau in [inst.tau0() + 0.01, 1.3, 1.8, 4.0] {
            let envelope = inst.r_tilde * inst.q(tau).sqrt() - inst.c_tilde * tau;
            let mut grid_best = f64::NEG_INFINITY;
            for i in 0..=4000 {
                let h = -inst.r_tilde + 2.0 * inst.r_tilde * i as f64 / 4000.0;
                grid_best = grid_best.max(inst.violation_unchecked(h, tau));
            }
            assert!(grid_best <= envelope + 1e-9);
            let at_hat = inst.violation_unchecked(inst.h_hat(tau), tau);
            assert_relative_eq!(at_hat, envelope, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        let inst = witness_instance();
        assert!(inst.violation(0.0, 1.0).is_err());
        assert!(inst.violation(1.5, 2.0).is_err());
    }

    #[test]
    fn invariant_validation() {
        let uni = UnimodalityConfig::new(1.0, 0.05).unwrap();
        assert!(SeparationInstance::new(&uni, 1.0, 0.0, 0.5, 0.4).is_err()); // h_lo > h_hi
        assert!(SeparationInstance::new(&uni, 1.0, 0.0, -0.5, 1.0).is_err()); // h_hi = R~
        assert!(SeparationInstance::new(&uni, 1.0, -0.9, 0.5, 0.6).is_err()); // c~ < -alpha h_lo
        // c~ slightly below the bound from solver noise is clamped.
        let inst = SeparationInstance::new(&uni, 1.0, 0.5 - 1e-12, -0.5, 0.5).unwrap();
        assert_eq!(inst.c_tilde, 0.5);
    }
}
