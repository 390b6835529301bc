//! Gaussian log-densities and log-sum-exp.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{MixtureError, Result};

/// A Gaussian with its covariance factorized once, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Gaussian {
    mean: DVector<f64>,
    /// Lower Cholesky factor of the covariance.
    chol: DMatrix<f64>,
    /// `−½[d·log(2π) + log det Σ]`.
    log_norm: f64,
}

impl Gaussian {
    /// Factorizes `covariance`. The component index in a returned
    /// `DegenerateCovariance` is 0; mixture-level callers rewrite it.
    pub fn new(mean: &DVector<f64>, covariance: &DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if covariance.nrows() != dim || covariance.ncols() != dim {
            return Err(MixtureError::DimensionMismatch {
                expected: dim,
                found: covariance.nrows(),
                context: "covariance size".into(),
            });
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| MixtureError::DegenerateCovariance {
                component: 0,
                reason: "Cholesky factorization failed".into(),
            })?
            .unpack();
        let log_det = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(MixtureError::DegenerateCovariance {
                component: 0,
                reason: format!("log-determinant is {log_det}"),
            });
        }
        let log_norm = -0.5 * (dim as f64 * (2.0 * PI).ln() + log_det);
        Ok(Self {
            mean: mean.clone(),
            chol,
            log_norm,
        })
    }

    pub(crate) fn for_component(
        component: usize,
        mean: &DVector<f64>,
        covariance: &DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(mean, covariance).map_err(|err| match err {
            MixtureError::DegenerateCovariance { reason, .. } => {
                MixtureError::DegenerateCovariance { component, reason }
            }
            other => other,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `log φ(y | μ, Σ)`; `scratch` must have length `d`.
    pub fn log_density_with(&self, y: &DVector<f64>, scratch: &mut [f64]) -> f64 {
        let dim = self.dim();
        // Forward substitution: scratch = L⁻¹ (y − μ).
        let mut quad = 0.0;
        for r in 0..dim {
            let mut acc = y[r] - self.mean[r];
            for (c, z) in scratch[..r].iter().enumerate() {
                acc -= self.chol[(r, c)] * z;
            }
            let z = acc / self.chol[(r, r)];
            scratch[r] = z;
            quad += z * z;
        }
        self.log_norm - 0.5 * quad
    }

    pub fn log_density(&self, y: &DVector<f64>) -> f64 {
        let mut scratch = vec![0.0; self.dim()];
        self.log_density_with(y, &mut scratch)
    }
}

/// `log φ(y | μ, Σ)` for a single point.
pub fn gaussian_log_density(
    y: &DVector<f64>,
    mean: &DVector<f64>,
    covariance: &DMatrix<f64>,
) -> Result<f64> {
    if y.len() != mean.len() {
        return Err(MixtureError::DimensionMismatch {
            expected: mean.len(),
            found: y.len(),
            context: "point dimension".into(),
        });
    }
    Ok(Gaussian::new(mean, covariance)?.log_density(y))
}

/// Numerically stable `log Σ exp(x_k)`. Returns `−∞` for an empty or
/// all-`−∞` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
