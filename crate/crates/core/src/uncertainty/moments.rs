//! First/second moment estimation from scenario data.

use super::{ScenarioPool, UncertaintyError};
use crate::linalg::symmetrize;
use nalgebra::{DMatrix, DVector};

/// First moment mu and raw second moment sigma = E[xi xi'].
///
/// The reformulations consume the second moment in raw form; the centered
/// covariance sigma - mu mu' is derived and must be positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentData {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl MomentData {
    /// Builds moment data, symmetrizing `sigma` and verifying that the
    /// centered covariance admits a Cholesky factorization.
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self, UncertaintyError> {
        let n = mu.len();
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(UncertaintyError::DimensionMismatch { expected: n, got: sigma.nrows() });
        }
        let sigma = symmetrize(&sigma);
        let data = Self { mu, sigma };
        if data.centered_covariance().cholesky().is_none() {
            return Err(UncertaintyError::DegenerateMoments);
        }
        Ok(data)
    }

    /// Convenience constructor from mean and *centered* covariance.
    pub fn from_mean_cov(mu: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, UncertaintyError> {
        let sigma = symmetrize(&cov) + &mu * mu.transpose();
        Self::new(mu, sigma)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    /// Raw second moment E[xi xi'].
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Centered covariance sigma - mu mu'.
    pub fn centered_covariance(&self) -> DMatrix<f64> {
        &self.sigma - &self.mu * self.mu.transpose()
    }
}

/// Sample mean and raw sample second moment `(1/N) sum xi xi'`.
///
/// Fails with [`UncertaintyError::DegenerateMoments`] when the centered
/// covariance is singular, e.g. fewer than n+1 distinct samples or
/// collinear data.
pub fn estimate_moments(pool: &ScenarioPool) -> Result<MomentData, UncertaintyError> {
    let n = pool.dim();
    let len = pool.len() as f64;
    let mut mu = DVector::zeros(n);
    let mut sigma = DMatrix::zeros(n, n);
    for i in 0..pool.len() {
        let x = pool.sample(i);
        mu += &x;
        sigma += &x * x.transpose();
    }
    mu /= len;
    sigma /= len;
    MomentData::new(mu, sigma)
}
