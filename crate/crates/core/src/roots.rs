//! One-dimensional root finding and line search used by the separation
//! oracle and the brute-force verification grids.

/// Bisection on a sign-changing function.
///
/// Requires `f(lo)` and `f(hi)` to have opposite (non-strict) signs; shrinks
/// the bracket until its width is below `tol` and returns the midpoint.
/// Infinite function values are fine as long as the sign is meaningful,
/// which matters for derivatives that blow up at an interval endpoint.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(
        flo.signum() != fhi.signum(),
        "bisect: no sign change on bracket [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}"
    );
    let falling = flo > 0.0;
    // 200 iterations cap: |hi-lo| halves each step, so any practical
    // bracket reaches 1e-12 long before that.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid > 0.0) == falling {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Exact for unimodal functions; used by the brute-force oracle to refine
/// around the best grid cell, where the objective is locally unimodal.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}
