//! Nonemptiness check for the unimodal ambiguity sets: the centered
//! covariance scaled by (alpha+2)/alpha must strictly dominate the rank-one
//! matrix built from the mean-to-mode deviation, for every admissible mode.
//!
//! Equivalently, with Q = ((alpha+2)/alpha)(sigma - mu mu'),
//! max over m in Xi of (mu-m)' Q^{-1} (mu-m) must be < alpha^2.

use super::{ModeSupport, MomentData};
use crate::linalg::{spd_solve, symmetrize};
use nalgebra::{DMatrix, DVector};

/// Returns true iff the ambiguity set is nonempty for every mode in the
/// support: `(mu-m)' Q^{-1} (mu-m) < alpha^2` for all m in Xi.
///
/// Rectangles maximize the convex quadratic over the 2^n vertices;
/// ellipsoids solve the trust-region-style boundary maximization; points
/// evaluate once.
pub fn check_assumption1(moments: &MomentData, support: &ModeSupport, alpha: f64) -> bool {
    let q = moments.centered_covariance() * ((alpha + 2.0) / alpha);
    let mu = moments.mu();
    let form = |m: &DVector<f64>| -> f64 {
        let d = mu - m;
        let y = spd_solve(&q, &d).expect("centered covariance is PD by construction");
        d.dot(&y)
    };
    let worst = match support {
        ModeSupport::Point { m } => form(m),
        ModeSupport::Rectangle { lo, hi } => {
            let n = lo.len();
            assert!(n <= 30, "vertex enumeration over 2^n corners; n too large");
            let mut worst = f64::NEG_INFINITY;
            let mut vertex = lo.clone();
            for mask in 0u64..(1u64 << n) {
                for j in 0..n {
                    vertex[j] = if mask & (1 << j) != 0 { hi[j] } else { lo[j] };
                }
                worst = worst.max(form(&vertex));
            }
            worst
        }
        ModeSupport::Ellipsoid { center, shape } => {
            max_quad_over_ellipsoid(&q, mu, center, shape)
        }
    };
    worst < alpha * alpha
}

/// Maximizes (mu-m)' Q^{-1} (mu-m) over the ellipsoid
/// `{ m = c + P^{1/2} u : ||u|| <= 1 }`.
///
/// Substituting m gives a convex quadratic in u, maximized on the sphere
/// boundary; the stationarity condition `(lambda I - B)u = g` with
/// `lambda >= lambda_max(B)` is solved through the eigenbasis of
/// `B = P^{1/2} Q^{-1} P^{1/2}` (secular equation, bisection on lambda),
/// including the hard case where g is orthogonal to the top eigenspace.
fn max_quad_over_ellipsoid(
    q: &DMatrix<f64>,
    mu: &DVector<f64>,
    center: &DVector<f64>,
    shape: &DMatrix<f64>,
) -> f64 {
    let p_sqrt = crate::linalg::sym_sqrt(shape).expect("shape validated PD at construction");
    let d = mu - center;
    let qinv_d = spd_solve(q, &d).expect("Q is PD");
    let const_term = d.dot(&qinv_d);
    let g = &p_sqrt * &qinv_d;

    // B = P^{1/2} Q^{-1} P^{1/2}, assembled column by column.
    let n = d.len();
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = p_sqrt.column(j).into_owned();
        let y = spd_solve(q, &col).expect("Q is PD");
        b.set_column(j, &(&p_sqrt * y));
    }
    let eig = symmetrize(&b).symmetric_eigen();
    let beta = &eig.eigenvalues;
    let g_hat = eig.eigenvectors.transpose() * &g;
    let beta_max = beta.max();

    // phi(u) = u'Bu + 2g'u + const; maximizer solves (lambda I - B)u = g_hat
    // in the eigenbasis with ||u|| = 1 and lambda >= beta_max.
    let norm2_at = |lambda: f64| -> f64 {
        (0..n)
            .map(|i| {
                let denom = lambda - beta[i];
                (g_hat[i] / denom).powi(2)
            })
            .sum()
    };

    let g_norm = g.norm();
    let u_hat: DVector<f64>;
    if g_norm <= 1e-14 {
        // Pure eigenvector case: maximize u'Bu on the sphere.
        u_hat = DVector::from_fn(n, |i, _| if beta[i] == beta_max { 1.0 } else { 0.0 }).normalize();
    } else {
        // Components of g on the top eigenspace decide hard vs easy case.
        let top_mass: f64 = (0..n)
            .filter(|&i| beta_max - beta[i] <= 1e-12 * beta_max.abs().max(1.0))
            .map(|i| g_hat[i] * g_hat[i])
            .sum();
        let interior_limit: f64 = (0..n)
            .filter(|&i| beta_max - beta[i] > 1e-12 * beta_max.abs().max(1.0))
            .map(|i| (g_hat[i] / (beta_max - beta[i])).powi(2))
            .sum();
        if top_mass <= 1e-28 && interior_limit < 1.0 {
            // Hard case: take the pseudo-inverse solution plus a top
            // eigenvector component to reach the sphere.
            let mut u = DVector::zeros(n);
            for i in 0..n {
                if beta_max - beta[i] > 1e-12 * beta_max.abs().max(1.0) {
                    u[i] = g_hat[i] / (beta_max - beta[i]);
                }
            }
            let t = (1.0 - u.norm_squared()).max(0.0).sqrt();
            for i in 0..n {
                if beta_max - beta[i] <= 1e-12 * beta_max.abs().max(1.0) {
                    u[i] = t;
                    break;
                }
            }
            u_hat = u;
        } else {
            // Easy case: ||u(lambda)|| decreases from +inf to 0 on
            // (beta_max, inf); bracket and bisect ||u||^2 = 1.
            let mut lo = beta_max + 1e-14 * beta_max.abs().max(1.0);
            while norm2_at(lo) < 1.0 {
                // Numerical guard: push lo toward beta_max until the norm
                // exceeds 1 (possible when g_hat on the top space is tiny).
                let gap = lo - beta_max;
                if gap < 1e-300 {
                    break;
                }
                lo = beta_max + gap * 0.5;
            }
            let hi = beta_max + g_norm + 1.0;
            debug_assert!(norm2_at(hi) < 1.0);
            let lambda = crate::roots::bisect(|l| norm2_at(l) - 1.0, lo, hi, 1e-14);
            u_hat = DVector::from_fn(n, |i, _| g_hat[i] / (lambda - beta[i]));
        }
    }

    let u = &eig.eigenvectors * u_hat;
    let bu = &b * &u;
    u.dot(&bu) + 2.0 * g.dot(&u) + const_term
}
