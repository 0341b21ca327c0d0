//! The analytic worst-case search over (tau, h).
//!
//! Interval layout (h_hat strictly decreasing, h_hat(tau0) = R~):
//!
//! * Case 1, tau in [tau0, tau_lo]: inner maximizer clamps to h = h_hi; the
//!   edge function `F1 = C1 g(tau) - (c~ + alpha h_hi) tau + (alpha+1) h_hi`
//!   is concave, so its derivative is bisected once.
//! * Case 2, tau in [tau_lo, tau_hi]: h = h_hat(tau) is interior and the
//!   violation equals `V2 = R~ sqrt(g^2+f^2) - c~ tau`. With q = g^2 + f^2,
//!   `d/dtau [2 q q'' - q'^2] = 2 q q''' > 0`, so sqrt(q) switches from
//!   concave to convex at most once: V2's maximum lies at a bisected
//!   stationary point on the concave part or at a segment endpoint.
//! * Case 3, tau in [tau_hi, inf): h clamps to h_lo; `F3` is concave with a
//!   finite search bound tau2 (its derivative is provably nonpositive
//!   there), except for `c~ + alpha h_lo = 0` where F3 increases toward a
//!   finite supremum attained only in the limit.

use super::{SeparationInstance, WorstCase};
use crate::roots::bisect;

/// Tolerance on tau for all bisections here.
const TAU_TOL: f64 = 1e-12;

/// Threshold below which `c~ + alpha h_lo` is treated as exactly zero
/// (Case 3 supremum branch).
const SUPREMUM_EPS: f64 = 1e-10;

/// How far below the Case-3 supremum the emitted finite tau may sit.
const SUPREMUM_GAP: f64 = 1e-6;

/// Finite upper bound for solving `h_hat(tau) = h` when `h < 0`: replacing
/// g^2 by its limit (1-eps)/eps in the denominator of h_hat gives a smaller
/// (more negative) curve, so its crossing point upper-bounds the true one:
///
/// `tau1 = -(h sqrt((1-eps)/(eps (R~^2 - h^2))) - (alpha+1)) / alpha`.
pub fn h_hat_crossing_bound(inst: &SeparationInstance, h: f64) -> f64 {
    debug_assert!(h < 0.0);
    let scale = ((1.0 - inst.epsilon)
        / (inst.epsilon * (inst.r_tilde * inst.r_tilde - h * h)))
        .sqrt();
    -(h * scale - (inst.alpha + 1.0)) / inst.alpha
}

/// Finite upper bound for the Case-3 search when `c~ + alpha h_lo > 0`:
/// the root of a dominating derivative surrogate, obtained from a quadratic
/// in tau^-alpha:
///
/// `tau2 = [(-1 + sqrt(1 + 4(1-eps) C2)) / (2 C2)]^(-1/alpha)` with
/// `C2 = alpha^2 C3^2 / (4 eps (c~ + alpha h_lo)^2)`.
///
/// Returns None when `c~ + alpha h_lo = 0` (no finite bound exists).
pub fn tail_search_bound(inst: &SeparationInstance) -> Option<f64> {
    let s3 = inst.c_tilde + inst.alpha * inst.h_lo;
    if s3 <= SUPREMUM_EPS {
        return None;
    }
    let c3 = (inst.r_tilde * inst.r_tilde - inst.h_lo * inst.h_lo).sqrt();
    let c2 = inst.alpha * inst.alpha * c3 * c3 / (4.0 * inst.epsilon * s3 * s3);
    let root = (-1.0 + (1.0 + 4.0 * (1.0 - inst.epsilon) * c2).sqrt()) / (2.0 * c2);
    Some(root.powf(-1.0 / inst.alpha))
}

/// Solves `h_hat(tau) = target` for the unique tau >= tau0.
fn solve_h_hat(inst: &SeparationInstance, target: f64) -> f64 {
    let tau0 = inst.tau0();
    let knee = (inst.alpha + 1.0) / inst.alpha; // h_hat = 0 here
    let (lo, hi) = if target >= 0.0 {
        (tau0, knee)
    } else {
        (knee, h_hat_crossing_bound(inst, target))
    };
    if lo >= hi {
        // target == 0 lands exactly on the knee.
        return knee;
    }
    bisect(|tau| inst.h_hat(tau) - target, lo, hi, TAU_TOL)
}

/// The tau interval on which the inner maximizer h_hat stays within
/// [h_lo, h_hi]: `tau_lo` solves `h_hat = h_hi`, `tau_hi` solves
/// `h_hat = h_lo`.
pub fn tau_bracket(inst: &SeparationInstance) -> (f64, f64) {
    let tau_lo = solve_h_hat(inst, inst.h_hi);
    let tau_hi = if inst.h_lo == inst.h_hi {
        tau_lo
    } else {
        solve_h_hat(inst, inst.h_lo)
    };
    (tau_lo, tau_hi)
}

/// Maximizes the concave edge function at fixed h over [lo, hi]:
/// `F(tau) = C g(tau) - (c~ + alpha h) tau + (alpha+1) h`,
/// `C = sqrt(R~^2 - h^2)`.
fn edge_max(inst: &SeparationInstance, h: f64, lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo <= TAU_TOL {
        return (lo, inst.violation_unchecked(h, lo));
    }
    let c = (inst.r_tilde * inst.r_tilde - h * h).max(0.0).sqrt();
    let slope = inst.c_tilde + inst.alpha * h;
    let deriv = |tau: f64| c * inst.g_prime(tau) - slope;
    let tau_star = if deriv(hi) >= 0.0 {
        hi // increasing throughout (derivative is decreasing)
    } else if deriv(lo) <= 0.0 {
        lo
    } else {
        bisect(deriv, lo, hi, TAU_TOL)
    };
    (tau_star, inst.violation_unchecked(h, tau_star))
}

/// Case 2: maximize `V2(tau) = R~ sqrt(q) - c~ tau` on [lo, hi] using the
/// concave-then-convex certificate for sqrt(q).
fn interior_max(inst: &SeparationInstance, lo: f64, hi: f64) -> (f64, f64) {
    let value = |tau: f64| {
        let h = inst.h_hat(tau).clamp(inst.h_lo, inst.h_hi);
        inst.violation_unchecked(h, tau)
    };
    if hi - lo <= TAU_TOL {
        return (lo, value(lo));
    }
    // w < 0 iff sqrt(q) is strictly concave; w is strictly increasing.
    let w = |tau: f64| 2.0 * inst.q(tau) * inst.q_second(tau) - inst.q_prime(tau).powi(2);
    let concave_end = if w(lo) >= 0.0 {
        lo
    } else if w(hi) <= 0.0 {
        hi
    } else {
        bisect(w, lo, hi, TAU_TOL)
    };

    let mut candidates = vec![lo, concave_end, hi];
    if concave_end > lo {
        // V2' is decreasing on the concave segment; bisect a sign change.
        let v2_prime =
            |tau: f64| inst.r_tilde * inst.q_prime(tau) / (2.0 * inst.q(tau).sqrt()) - inst.c_tilde;
        if v2_prime(lo) > 0.0 && v2_prime(concave_end) < 0.0 {
            candidates.push(bisect(v2_prime, lo, concave_end, TAU_TOL));
        }
    }

    candidates
        .into_iter()
        .map(|tau| (tau, value(tau)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("candidate list is non-empty")
}

/// Case 3 result: either an attained maximum or the finite supremum with an
/// emission point.
fn tail_max(inst: &SeparationInstance, lo: f64) -> (f64, f64, bool) {
    let h = inst.h_lo;
    let s3 = inst.c_tilde + inst.alpha * h;
    let c3 = (inst.r_tilde * inst.r_tilde - h * h).max(0.0).sqrt();
    if s3.abs() <= SUPREMUM_EPS {
        // V(h_lo, tau) = C3 g(tau) + (alpha+1) h_lo - s3 tau; with s3 = 0 it
        // increases toward a finite supremum as g -> sqrt((1-eps)/eps).
        // Emit a tau whose value sits within SUPREMUM_GAP of it.
        let g_inf = ((1.0 - inst.epsilon) / inst.epsilon).sqrt();
        let sup = c3 * g_inf + (inst.alpha + 1.0) * h;
        let tau_emit = if c3 * g_inf <= SUPREMUM_GAP {
            lo.max((inst.alpha + 1.0) / inst.alpha)
        } else {
            let g_target = g_inf - SUPREMUM_GAP / c3;
            let t = (1.0 - inst.epsilon - inst.epsilon * g_target * g_target)
                .powf(-1.0 / inst.alpha);
            t.max(lo)
        };
        (tau_emit, sup, true)
    } else {
        let deriv = |tau: f64| c3 * inst.g_prime(tau) - s3;
        if deriv(lo) <= 0.0 {
            (lo, inst.violation_unchecked(h, lo), false)
        } else {
            let hi = tail_search_bound(inst).expect("s3 > 0 here");
            debug_assert!(hi >= lo - 1e-9, "tail search bound {hi} below interval start {lo}");
            let tau_star = bisect(deriv, lo, hi.max(lo), TAU_TOL);
            (tau_star, inst.violation_unchecked(h, tau_star), false)
        }
    }
}

/// Global maximizer of the violation over tau >= tau0, h in [h_lo, h_hi].
pub fn worst_case(inst: &SeparationInstance) -> WorstCase {
    let tau0 = inst.tau0();
    let (tau_lo, tau_hi) = tau_bracket(inst);

    let (t1, v1) = edge_max(inst, inst.h_hi, tau0, tau_lo);
    let (t2, v2) = interior_max(inst, tau_lo, tau_hi);
    let (t3, v3, at_sup) = tail_max(inst, tau_hi);

    let mut best = WorstCase { tau: t1, h: inst.h_hi, violation: v1, at_supremum: false };
    if v2 > best.violation {
        let h = inst.h_hat(t2).clamp(inst.h_lo, inst.h_hi);
        best = WorstCase { tau: t2, h, violation: v2, at_supremum: false };
    }
    if v3 > best.violation {
        best = WorstCase { tau: t3, h: inst.h_lo, violation: v3, at_supremum: at_sup };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::UnimodalityConfig;
    use approx::assert_relative_eq;

    fn inst(alpha: f64, eps: f64, r: f64, c: f64, h_lo: f64, h_hi: f64) -> SeparationInstance {
        let uni = UnimodalityConfig::new(alpha, eps).unwrap();
        SeparationInstance::new(&uni, r, c, h_lo, h_hi).unwrap()
    }

    #[test]
    fn crossing_bound_value_and_property() {
        // alpha=1, eps=0.05, R~=1, h_lo=-0.5:
        // tau1 = 0.5 sqrt(0.95/(0.05*0.75)) + 2.
        let i = inst(1.0, 0.05, 1.0, 0.6, -0.5, 0.5);
        let tau1 = h_hat_crossing_bound(&i, -0.5);
        assert_relative_eq!(tau1, 4.5166, epsilon = 1e-4);
        assert!(i.h_hat(tau1) <= -0.5 + 1e-12);
    }

    #[test]
    fn bracket_degenerate_and_sign_cases() {
        // h_lo = h_hi = 0 -> both ends at (alpha+1)/alpha.
        let i = inst(2.0, 0.1, 1.0, 0.5, 0.0, 0.0);
        let (lo, hi) = tau_bracket(&i);
        assert_relative_eq!(lo, 1.5, epsilon = 1e-9);
        assert_relative_eq!(hi, 1.5, epsilon = 1e-9);

        // h_lo >= 0 -> tau_hi <= (alpha+1)/alpha.
        let i = inst(1.0, 0.05, 1.0, 0.8, 0.2, 0.7);
        let (lo, hi) = tau_bracket(&i);
        assert!(hi <= 2.0 + 1e-9);
        assert!(i.tau0() < lo && lo <= hi);
        assert_relative_eq!(i.h_hat(lo), 0.7, epsilon = 1e-9);
        assert_relative_eq!(i.h_hat(hi), 0.2, epsilon = 1e-9);
    }

    #[test]
    fn large_c_means_no_violation() {
        let i = inst(1.0, 0.05, 1.0, 1e3, -0.4, 0.6);
        let wc = worst_case(&i);
        assert!(wc.violation < 0.0);
        assert!(!wc.at_supremum);
    }

    #[test]
    fn fixed_mode_at_mean_maximizer_matches_single_cut_constant() {
        // h_lo = h_hi = 0: the worst case sits at the same interior tau*
        // that defines the fixed-mode-at-mean cut constant, and the
        // violation vanishes exactly at the binding threshold.
        for (alpha, eps) in [(1.0f64, 0.05f64), (2.0, 0.1), (3.0, 0.01)] {
            let tau_star = ((alpha + 2.0) / (2.0 * (1.0 - eps))).powf(1.0 / alpha);
            let r: f64 = 1.7;
            let uni = UnimodalityConfig::new(alpha, eps).unwrap();
            let g_at = |t: f64| ((1.0 - eps - t.powf(-alpha)) / eps).sqrt();
            let c_binding = r * g_at(tau_star) / tau_star;
            let i = SeparationInstance::new(&uni, r, c_binding, 0.0, 0.0).unwrap();
            let wc = worst_case(&i);
            assert_relative_eq!(wc.tau, tau_star, epsilon = 1e-7);
            assert!(wc.violation.abs() < 1e-9);
        }
    }

    #[test]
    fn supremum_branch_reports_limit_value() {
        // c~ + alpha h_lo = 0 with h_lo < 0: F3 increases forever.
        let i = inst(1.0, 0.05, 1.0, 0.3, -0.3, 0.4);
        let wc = worst_case(&i);
        assert!(wc.at_supremum);
        let c3 = (1.0f64 - 0.09).sqrt();
        let sup = c3 * (0.95f64 / 0.05).sqrt() + 2.0 * (-0.3);
        assert_relative_eq!(wc.violation, sup, epsilon = 1e-12);
        // The emitted tau evaluates within the documented gap.
        let at_emit = i.violation_unchecked(-0.3, wc.tau);
        assert!(sup - at_emit <= 1e-6 + 1e-12);
        assert!(at_emit <= sup);
    }

    #[test]
    fn worst_case_dominates_dense_grid_on_witness_surface() {
        // alpha=1, eps=0.05, R~=1, c~=0, h in [0.1, 0.6].
        let i = inst(1.0, 0.05, 1.0, 0.0, 0.1, 0.6);
        let wc = worst_case(&i);
        let mut grid_best = f64::NEG_INFINITY;
        for it in 0..=4000 {
            let tau = i.tau0() + it as f64 * (40.0 - i.tau0()) / 4000.0;
            for ih in 0..=400 {
                let h = 0.1 + 0.5 * ih as f64 / 400.0;
                grid_best = grid_best.max(i.violation_unchecked(h, tau));
            }
        }
        assert!(wc.violation >= grid_best - 1e-9);
        assert!(wc.violation <= grid_best + 1e-3, "analytic should be near the grid max");
    }
}
