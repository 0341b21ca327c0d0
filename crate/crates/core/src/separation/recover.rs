//! Mapping between the scalar h coordinate and concrete mode vectors.

use super::SeparationError;
use crate::uncertainty::ModeSupport;
use nalgebra::DVector;

/// Range of `h = a'(mu - m)/alpha` as m sweeps the support.
pub fn h_range(
    support: &ModeSupport,
    a: &DVector<f64>,
    mu: &DVector<f64>,
    alpha: f64,
) -> (f64, f64) {
    let base = a.dot(mu);
    let h_lo = (base - support.max_inner(a)) / alpha;
    let h_hi = (base - support.min_inner(a)) / alpha;
    (h_lo, h_hi)
}

/// Recovers a mode vector m* in the support with `a'(mu - m*)/alpha = h`.
///
/// Rectangle: solve the linear relation for the scaling `lambda_r` of the
/// sign-aligned corner direction, clamped to [-1, 1]. Ellipsoid: scale the
/// shape-metric gradient direction by `lambda_e` in [-1, 1]. Point: the
/// point itself (h must match).
pub fn recover_mode(
    h: f64,
    a: &DVector<f64>,
    mu: &DVector<f64>,
    alpha: f64,
    support: &ModeSupport,
) -> Result<DVector<f64>, SeparationError> {
    let (h_lo, h_hi) = h_range(support, a, mu, alpha);
    let tol = 1e-9 * (h_hi - h_lo).abs().max(1.0);
    if h < h_lo - tol || h > h_hi + tol {
        return Err(SeparationError::DomainError(format!(
            "h = {h} outside the admissible range [{h_lo}, {h_hi}]"
        )));
    }
    let h = h.clamp(h_lo, h_hi);
    match support {
        ModeSupport::Point { m } => Ok(m.clone()),
        ModeSupport::Rectangle { lo, hi } => {
            let center = (lo + hi) * 0.5;
            let half = (hi - lo) * 0.5;
            let spread = a.abs().dot(&half);
            let lambda_r = if spread > 1e-14 {
                ((alpha * h - a.dot(&(mu - &center))) / spread).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            let signed: DVector<f64> =
                DVector::from_fn(a.len(), |i, _| a[i].signum() * half[i] * lambda_r);
            Ok(center - signed)
        }
        ModeSupport::Ellipsoid { center, shape } => {
            let sqrt = crate::linalg::sym_sqrt(shape).expect("shape validated PD");
            let metric_norm = (&sqrt * a).norm();
            if metric_norm <= 1e-14 {
                return Ok(center.clone());
            }
            let lambda_e = ((a.dot(&(mu - center)) - alpha * h) / metric_norm).clamp(-1.0, 1.0);
            Ok(center + shape * a * (lambda_e / metric_norm))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn box_boundary_recovers_the_minimizing_vertex() {
        let lo = DVector::from_vec(vec![-1.0, -2.0]);
        let hi = DVector::from_vec(vec![2.0, 1.0]);
        let support = ModeSupport::rectangle(lo, hi).unwrap();
        let a = DVector::from_vec(vec![1.0, -0.5]);
        let mu = DVector::zeros(2);
        let (_, h_hi) = h_range(&support, &a, &mu, 1.0);
        let m = recover_mode(h_hi, &a, &mu, 1.0, &support).unwrap();
        // h maximal means a'm minimal: vertex (-1, 1).
        assert_relative_eq!(m, DVector::from_vec(vec![-1.0, 1.0]), epsilon = 1e-12);
    }

    #[test]
    fn ellipsoid_midpoint_recovers_the_center() {
        let center = DVector::from_vec(vec![0.5, -0.25]);
        let support =
            ModeSupport::ellipsoid(center.clone(), DMatrix::identity(2, 2) * 2.0).unwrap();
        let a = DVector::from_vec(vec![1.0, 1.0]);
        let mu = DVector::zeros(2);
        let (h_lo, h_hi) = h_range(&support, &a, &mu, 2.0);
        let m = recover_mode(0.5 * (h_lo + h_hi), &a, &mu, 2.0, &support).unwrap();
        assert_relative_eq!(m, center, epsilon = 1e-12);
    }

    #[test]
    fn random_instances_roundtrip_h_and_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for k in 0..300 {
            let n = rng.random_range(1..5);
            let alpha = rng.random_range(1.0..4.0);
            let mu = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let a = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let support = match k % 3 {
                0 => {
                    let c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
                    let half = DVector::from_fn(n, |_, _| rng.random_range(0.0..1.5));
                    ModeSupport::rectangle(&c - &half, &c + &half).unwrap()
                }
                1 => {
                    let c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
                    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                    ModeSupport::ellipsoid(c, &b * b.transpose() + DMatrix::identity(n, n) * 0.2)
                        .unwrap()
                }
                _ => ModeSupport::point(DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0))),
            };
            let (h_lo, h_hi) = h_range(&support, &a, &mu, alpha);
            let t: f64 = rng.random_range(0.0..1.0);
            let h = h_lo + t * (h_hi - h_lo);
            let m = recover_mode(h, &a, &mu, alpha, &support).unwrap();
            assert!(support.contains(&m, 1e-9), "recovered mode escaped the support");
            assert_relative_eq!(
                a.dot(&(&mu - &m)) / alpha,
                h,
                epsilon = 1e-9,
                max_relative = 1e-9
            );
            assert!(recover_mode(h_hi + 1.0 + (h_hi - h_lo), &a, &mu, alpha, &support).is_err());
        }
    }
}
