//! Mode supports (the set Xi of admissible mode locations) and the
//! histogram-based mode estimator.

use super::{ScenarioPool, UncertaintyError};
use crate::linalg::{spd_solve, sym_sqrt, symmetrize};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// The set of admissible mode locations: a single point, an axis-aligned
/// rectangle `[lo, hi]`, or an ellipsoid `{ m : (m-c)' P^{-1} (m-c) <= 1 }`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeSupport {
    Point { m: DVector<f64> },
    Rectangle { lo: DVector<f64>, hi: DVector<f64> },
    Ellipsoid { center: DVector<f64>, shape: DMatrix<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportShape {
    Rectangle,
    Ellipsoid,
}

impl ModeSupport {
    pub fn point(m: DVector<f64>) -> Self {
        ModeSupport::Point { m }
    }

    pub fn rectangle(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self, UncertaintyError> {
        if lo.len() != hi.len() {
            return Err(UncertaintyError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(UncertaintyError::InvalidConfig(
                "rectangle lower corner exceeds upper corner".into(),
            ));
        }
        Ok(ModeSupport::Rectangle { lo, hi })
    }

    /// `shape` must be symmetric positive definite.
    pub fn ellipsoid(center: DVector<f64>, shape: DMatrix<f64>) -> Result<Self, UncertaintyError> {
        let shape = symmetrize(&shape);
        if shape.nrows() != center.len() {
            return Err(UncertaintyError::DimensionMismatch {
                expected: center.len(),
                got: shape.nrows(),
            });
        }
        if shape.clone().cholesky().is_none() {
            return Err(UncertaintyError::InvalidConfig(
                "ellipsoid shape matrix is not positive definite".into(),
            ));
        }
        Ok(ModeSupport::Ellipsoid { center, shape })
    }

    pub fn dim(&self) -> usize {
        match self {
            ModeSupport::Point { m } => m.len(),
            ModeSupport::Rectangle { lo, .. } => lo.len(),
            ModeSupport::Ellipsoid { center, .. } => center.len(),
        }
    }

    /// max over m in Xi of a' m (support function).
    pub fn max_inner(&self, a: &DVector<f64>) -> f64 {
        match self {
            ModeSupport::Point { m } => a.dot(m),
            ModeSupport::Rectangle { lo, hi } => {
                let center = (lo + hi) * 0.5;
                let half = (hi - lo) * 0.5;
                a.dot(&center) + a.abs().dot(&half)
            }
            ModeSupport::Ellipsoid { center, shape } => {
                let sqrt = sym_sqrt(shape).expect("shape validated PD at construction");
                a.dot(center) + (&sqrt * a).norm()
            }
        }
    }

    pub fn min_inner(&self, a: &DVector<f64>) -> f64 {
        -self.max_inner(&(-a))
    }

    pub fn contains(&self, m: &DVector<f64>, tol: f64) -> bool {
        match self {
            ModeSupport::Point { m: p } => (m - p).amax() <= tol,
            ModeSupport::Rectangle { lo, hi } => (0..m.len())
                .all(|i| m[i] >= lo[i] - tol && m[i] <= hi[i] + tol),
            ModeSupport::Ellipsoid { center, shape } => {
                let d = m - center;
                let y = spd_solve(shape, &d).expect("shape validated PD at construction");
                d.dot(&y) <= 1.0 + tol
            }
        }
    }
}

/// Center of the highest-count cell of an axis-aligned n-dimensional
/// histogram with `n_bins` bins per axis over the samples' bounding box.
///
/// Bins are equal-width per axis over the sample min/max range; samples on
/// the upper boundary fall in the last bin. Count ties are broken by the
/// lowest lexicographic cell index so the estimate is deterministic.
pub fn estimate_mode_histogram(
    pool: &ScenarioPool,
    n_bins: usize,
) -> Result<DVector<f64>, UncertaintyError> {
    if n_bins < 2 {
        return Err(UncertaintyError::InvalidConfig(format!(
            "histogram needs at least 2 bins per axis, got {n_bins}"
        )));
    }
    let n = pool.dim();
    let (lo, hi) = pool.bounding_box();
    let width: Vec<f64> = (0..n).map(|j| (hi[j] - lo[j]) / n_bins as f64).collect();

    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut idx = vec![0u32; n];
    for i in 0..pool.len() {
        for j in 0..n {
            let cell = if width[j] > 0.0 {
                (((pool.samples()[(i, j)] - lo[j]) / width[j]).floor() as usize).min(n_bins - 1)
            } else {
                0
            };
            idx[j] = cell as u32;
        }
        *counts.entry(idx.clone()).or_insert(0) += 1;
    }

    let best = counts
        .iter()
        .min_by(|(ia, ca), (ib, cb)| cb.cmp(ca).then_with(|| ia.cmp(ib)))
        .map(|(i, _)| i.clone())
        .expect("pool is non-empty");

    Ok(DVector::from_iterator(
        n,
        (0..n).map(|j| lo[j] + (best[j] as f64 + 0.5) * width[j]),
    ))
}

/// Builds the mode support from a list of mode estimates.
///
/// Rectangle: the componentwise bounding box of the estimates. Ellipsoid: an
/// enclosing ball in the metric of the estimates' covariance (eigenvalue
/// floor 1e-8 keeps collinear estimate clouds usable); every estimate lies
/// inside the result.
pub fn build_mode_support(
    estimates: &[DVector<f64>],
    shape: SupportShape,
) -> Result<ModeSupport, UncertaintyError> {
    let first = estimates.first().ok_or(UncertaintyError::EmptyPool)?;
    let n = first.len();
    if estimates.iter().any(|e| e.len() != n) {
        return Err(UncertaintyError::DimensionMismatch { expected: n, got: 0 });
    }
    match shape {
        SupportShape::Rectangle => {
            let mut lo = first.clone();
            let mut hi = first.clone();
            for e in estimates {
                for j in 0..n {
                    lo[j] = lo[j].min(e[j]);
                    hi[j] = hi[j].max(e[j]);
                }
            }
            ModeSupport::rectangle(lo, hi)
        }
        SupportShape::Ellipsoid => {
            let k = estimates.len() as f64;
            let mut mean = DVector::zeros(n);
            for e in estimates {
                mean += e;
            }
            mean /= k;
            let mut cov = DMatrix::zeros(n, n);
            for e in estimates {
                let d = e - &mean;
                cov += &d * d.transpose();
            }
            cov /= k;
            // Floor small/negative eigenvalues so the metric stays PD.
            let eig = symmetrize(&cov).symmetric_eigen();
            let vals = eig.eigenvalues.map(|v| v.max(1e-8));
            let cov = &eig.eigenvectors
                * DMatrix::from_diagonal(&vals)
                * eig.eigenvectors.transpose();
            let r2 = estimates
                .iter()
                .map(|e| {
                    let d = e - &mean;
                    let y = spd_solve(&cov, &d).expect("floored covariance is PD");
                    d.dot(&y)
                })
                .fold(0.0f64, f64::max);
            let p = if r2 <= 1e-12 { cov } else { cov * r2 };
            ModeSupport::ellipsoid(mean, p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_occupied_cell() {
        // 1-D samples concentrated in [0,1) of a 15-bin grid over [0,15).
        let mut rows = vec![vec![0.1], vec![0.5], vec![0.9]];
        rows.push(vec![15.0]); // stretches the range to [0.1, 15]
        rows.push(vec![0.2]);
        // Make the bounding box exactly [0, 15).
        rows.push(vec![0.0]);
        rows.push(vec![14.999999]);
        let pool = ScenarioPool::from_rows(&rows).unwrap();
        let mode = estimate_mode_histogram(&pool, 15).unwrap();
        assert!((mode[0] - 0.5) < 0.01, "mode {} should be near 0.5", mode[0]);
    }

    #[test]
    fn uniform_counts_pick_lexicographically_first_cell() {
        // One sample per cell of a 2x2 grid -> all counts equal -> cell (0,0).
        let pool = ScenarioPool::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let mode = estimate_mode_histogram(&pool, 2).unwrap();
        assert_relative_eq!(mode, DVector::from_vec(vec![0.25, 0.25]), epsilon = 1e-12);
    }

    #[test]
    fn bin_count_changes_the_estimate() {
        // Two clusters engineered so a coarse grid merges them (peak at the
        // merged cell) while a finer grid separates them.
        let mut rows = Vec::new();
        for i in 0..6 {
            rows.push(vec![0.30 + 0.001 * i as f64]);
            rows.push(vec![0.70 + 0.001 * i as f64]);
        }
        rows.push(vec![0.0]);
        rows.push(vec![1.0]);
        rows.push(vec![0.31]);
        let pool = ScenarioPool::from_rows(&rows).unwrap();
        let coarse = estimate_mode_histogram(&pool, 2).unwrap();
        let fine = estimate_mode_histogram(&pool, 10).unwrap();
        assert!((coarse[0] - fine[0]).abs() > 1e-6);
    }

    #[test]
    fn mode_lies_in_bounding_box() {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i as f64 * 0.37).sin() * 4.0, (i as f64 * 0.11).cos() * 2.0])
            .collect();
        let pool = ScenarioPool::from_rows(&rows).unwrap();
        let (lo, hi) = pool.bounding_box();
        for bins in [2, 7, 15, 30] {
            let m = estimate_mode_histogram(&pool, bins).unwrap();
            for j in 0..2 {
                assert!(m[j] >= lo[j] && m[j] <= hi[j]);
            }
        }
    }

    #[test]
    fn rectangle_is_bounding_box_of_estimates() {
        let estimates = vec![
            DVector::from_vec(vec![-4.44, -4.45]),
            DVector::from_vec(vec![0.10, 0.24]),
        ];
        let s = build_mode_support(&estimates, SupportShape::Rectangle).unwrap();
        match s {
            ModeSupport::Rectangle { lo, hi } => {
                assert_relative_eq!(lo, DVector::from_vec(vec![-4.44, -4.45]));
                assert_relative_eq!(hi, DVector::from_vec(vec![0.10, 0.24]));
            }
            _ => panic!("expected rectangle"),
        }
    }

    #[test]
    fn single_estimate_gives_degenerate_box() {
        let m = DVector::from_vec(vec![1.5, -2.0]);
        let s = build_mode_support(std::slice::from_ref(&m), SupportShape::Rectangle).unwrap();
        match s {
            ModeSupport::Rectangle { lo, hi } => {
                assert_eq!(lo, m);
                assert_eq!(hi, m);
            }
            _ => panic!("expected rectangle"),
        }
    }

    #[test]
    fn ellipsoid_contains_all_estimates_even_collinear() {
        let estimates: Vec<DVector<f64>> = (0..10)
            .map(|i| DVector::from_vec(vec![i as f64, 2.0 * i as f64 + 1.0]))
            .collect();
        let s = build_mode_support(&estimates, SupportShape::Ellipsoid).unwrap();
        for e in &estimates {
            assert!(s.contains(e, 1e-9), "estimate {e} escaped the ellipsoid");
        }
    }

    #[test]
    fn support_function_matches_vertex_enumeration() {
        let lo = DVector::from_vec(vec![-1.0, -2.0]);
        let hi = DVector::from_vec(vec![0.5, 3.0]);
        let s = ModeSupport::rectangle(lo.clone(), hi.clone()).unwrap();
        let a = DVector::from_vec(vec![2.0, -1.5]);
        let mut best = f64::NEG_INFINITY;
        for vx in [lo[0], hi[0]] {
            for vy in [lo[1], hi[1]] {
                best = best.max(a[0] * vx + a[1] * vy);
            }
        }
        assert_relative_eq!(s.max_inner(&a), best, epsilon = 1e-12);
    }
}
