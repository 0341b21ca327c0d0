//! Exhaustive verification oracle for the analytic worst-case search.
//!
//! Evaluates the violation on a log-spaced tau grid times a uniform h grid,
//! then refines the best cell by coordinate descent (golden-section in each
//! coordinate). Grid bounds come from the closed-form interval bounds only,
//! keeping the oracle independent of the bisection-based search it checks.

use super::worst::{h_hat_crossing_bound, tail_search_bound};
use super::{SeparationInstance, WorstCase};
use crate::roots::golden_max;

pub fn brute_force_worst_case(
    inst: &SeparationInstance,
    grid_tau: usize,
    grid_h: usize,
) -> WorstCase {
    assert!(grid_tau >= 2 && grid_h >= 1);
    let tau0 = inst.tau0();

    // Cap: past the tail search bound the edge segment is decreasing, and
    // all interior-segment maxima live below the crossing bound. The fallback
    // multiple of (alpha+1)/alpha covers instances where neither applies.
    let mut cap = 10.0 * (inst.alpha + 1.0) / inst.alpha;
    if let Some(tau2) = tail_search_bound(inst) {
        cap = cap.max(tau2);
    }
    if inst.h_lo < 0.0 {
        cap = cap.max(1.1 * h_hat_crossing_bound(inst, inst.h_lo));
    }

    // Precompute per-line values; the inner loop is then multiply-add only.
    let ratio = (cap / tau0).powf(1.0 / (grid_tau - 1) as f64);
    let taus: Vec<f64> = (0..grid_tau).map(|i| tau0 * ratio.powi(i as i32)).collect();
    let gs: Vec<f64> = taus.iter().map(|&t| inst.g(t)).collect();
    let fs: Vec<f64> = taus.iter().map(|&t| inst.f(t)).collect();

    let hs: Vec<f64> = if grid_h == 1 || inst.h_lo == inst.h_hi {
        vec![inst.h_lo]
    } else {
        (0..grid_h)
            .map(|j| inst.h_lo + (inst.h_hi - inst.h_lo) * j as f64 / (grid_h - 1) as f64)
            .collect()
    };
    let roots: Vec<f64> = hs
        .iter()
        .map(|&h| (inst.r_tilde * inst.r_tilde - h * h).max(0.0).sqrt())
        .collect();

    let mut best = f64::NEG_INFINITY;
    let (mut bi, mut bj) = (0usize, 0usize);
    for (i, (&tau, (&g, &f))) in taus.iter().zip(gs.iter().zip(fs.iter())).enumerate() {
        let ct = inst.c_tilde * tau;
        for (j, (&h, &root)) in hs.iter().zip(roots.iter()).enumerate() {
            let v = g * root + f * h - ct;
            if v > best {
                best = v;
                bi = i;
                bj = j;
            }
        }
    }

    // Coordinate-descent refinement around the best cell. The violation is
    // concave in h at fixed tau, so the h line search may span the full
    // range; the tau bracket starts at the neighbouring grid lines and
    // shrinks around each new center.
    let mut tau_cur = taus[bi];
    let mut h_cur = hs[bj];
    let mut t_lo = taus[bi.saturating_sub(1)];
    let mut t_hi = taus[(bi + 1).min(grid_tau - 1)];
    for _ in 0..50 {
        if inst.h_lo < inst.h_hi {
            let (h_new, _) = golden_max(
                |h| inst.violation_unchecked(h, tau_cur),
                inst.h_lo,
                inst.h_hi,
                1e-13 * (inst.h_hi - inst.h_lo).max(1.0),
            );
            h_cur = h_new;
        }
        let (t_new, _) = golden_max(
            |t| inst.violation_unchecked(h_cur, t),
            t_lo,
            t_hi,
            1e-13 * (t_hi - t_lo).max(1.0),
        );
        tau_cur = t_new;
        let w = 0.25 * (t_hi - t_lo);
        t_lo = (tau_cur - w).max(tau0);
        t_hi = (tau_cur + w).min(cap);
    }
    let refined = inst.violation_unchecked(h_cur, tau_cur);
    if refined > best {
        WorstCase { tau: tau_cur, h: h_cur, violation: refined, at_supremum: false }
    } else {
        WorstCase { tau: taus[bi], h: hs[bj], violation: best, at_supremum: false }
    }
}
