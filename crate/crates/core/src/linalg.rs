//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Eigenvalues this far below zero are treated as rounding noise and
/// clipped; anything below is a genuine indefiniteness.
pub const PSD_CLIP_TOL: f64 = 1e-10;

/// Symmetric positive-semidefinite square root via eigendecomposition.
///
/// Eigenvalues in `[-PSD_CLIP_TOL, 0)` are floored to zero; an eigenvalue
/// below `-PSD_CLIP_TOL` returns `None` (the matrix is not PSD).
pub fn sym_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -PSD_CLIP_TOL {
            return None;
        }
        *v = v.max(0.0).sqrt();
    }
    let d = DMatrix::from_diagonal(&vals);
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// (A + Aᵀ)/2 — used on construction of matrices that are symmetric up to
/// rounding.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Quadratic form xᵀ M x.
pub fn quad_form(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (x.transpose() * m * x)[(0, 0)]
}

/// Solve M y = x for symmetric positive definite M via Cholesky.
pub fn spd_solve(m: &DMatrix<f64>, x: &DVector<f64>) -> Option<DVector<f64>> {
    let chol = symmetrize(m).cholesky()?;
    Some(chol.solve(x))
}
