//! Mixture density, responsibilities and the likelihood-type functionals
//! `L`, `Q`, `Λ` and the Kullback penalty `D`.
//!
//! Everything is evaluated in the log domain. Proportions are used exactly
//! as stored, so for `Σ p ≠ 1` the "mixture density" is the unnormalized
//! `Σ_ℓ p_ℓ φ(y | μ_ℓ, Σ_ℓ)`.

use nalgebra::{DMatrix, DVector};

use crate::density::{log_sum_exp, Gaussian};
use crate::error::{MixtureError, Result};
use crate::params::{Dataset, MixtureParams};

/// Posterior membership probabilities `t_ij(θ)`, an `n × J` matrix whose
/// rows sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    log_t: DMatrix<f64>,
}

impl Responsibilities {
    pub(crate) fn from_log(log_t: DMatrix<f64>) -> Self {
        Self { log_t }
    }

    pub fn n_observations(&self) -> usize {
        self.log_t.nrows()
    }

    pub fn n_components(&self) -> usize {
        self.log_t.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.log_t[(i, j)].exp()
    }

    pub fn log(&self, i: usize, j: usize) -> f64 {
        self.log_t[(i, j)]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.log_t.map(f64::exp)
    }

    pub fn log_matrix(&self) -> &DMatrix<f64> {
        &self.log_t
    }

    /// `Σ_i t_ij`.
    pub fn column_sum(&self, j: usize) -> f64 {
        self.log_t.column(j).iter().map(|v| v.exp()).sum()
    }
}

/// Per-cycle diagnostics recorded along a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    /// Observed log-likelihood `L(θ | y)`.
    pub loglik: f64,
    /// `Λ(θ | y) = L(θ | y) − n(Σ p − 1)`.
    pub modified_loglik: f64,
    /// `D(θ^k, θ^{k−1} | y)`; zero for the initial point.
    pub kullback_penalty: f64,
    /// `Σ p − 1`.
    pub constraint_residual: f64,
}

fn factorize(theta: &MixtureParams) -> Result<Vec<Gaussian>> {
    theta
        .means()
        .iter()
        .zip(theta.covariances())
        .enumerate()
        .map(|(j, (mean, cov))| Gaussian::for_component(j, mean, cov))
        .collect()
}

/// `log p_j + log φ(y_i | μ_j, Σ_j)` for every `(i, j)`.
pub(crate) fn log_joint(theta: &MixtureParams, data: &Dataset) -> Result<DMatrix<f64>> {
    data.ensure_dim(theta.dim())?;
    let components = factorize(theta)?;
    let log_p: Vec<f64> = theta.proportions().iter().map(|p| p.ln()).collect();
    let mut scratch = vec![0.0; theta.dim()];
    let mut out = DMatrix::zeros(data.len(), theta.n_components());
    for (i, y) in data.observations().iter().enumerate() {
        for (j, component) in components.iter().enumerate() {
            out[(i, j)] = log_p[j] + component.log_density_with(y, &mut scratch);
        }
    }
    Ok(out)
}

/// Normalizes each row of a log-joint matrix. Returns the log-responsibilities
/// and the per-row log-normalizers `log g(y_i | θ)`.
pub(crate) fn normalize_rows(log_joint: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let (n, k) = log_joint.shape();
    let mut log_t = DMatrix::zeros(n, k);
    let mut norms = Vec::with_capacity(n);
    let mut row = vec![0.0; k];
    for i in 0..n {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = log_joint[(i, j)];
        }
        let lse = log_sum_exp(&row);
        if !lse.is_finite() {
            return Err(MixtureError::NumericalUnderflow { observation: i });
        }
        for j in 0..k {
            log_t[(i, j)] = row[j] - lse;
        }
        norms.push(lse);
    }
    Ok((log_t, norms))
}

/// Generalized-KL double sum `Σ_i Σ_j t'_ij log(t'_ij / t_ij)` between
/// log-responsibility matrices `prev` (θ′) and `next` (θ).
///
/// Each term is written as `t'(e^x − 1 − x)` with `x = log t − log t'`, which
/// equals the plain KL term once rows are summed (both rows sum to one) and
/// is nonnegative term by term. `0·log 0 = 0`.
pub(crate) fn kl_log_matrices(prev: &DMatrix<f64>, next: &DMatrix<f64>) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..prev.nrows() {
        for j in 0..prev.ncols() {
            let (lp, ln) = (prev[(i, j)], next[(i, j)]);
            let t_prev = lp.exp();
            if ln == f64::NEG_INFINITY {
                if t_prev > 0.0 {
                    return Err(MixtureError::InfinitePenalty {
                        observation: i,
                        component: j,
                    });
                }
                continue;
            }
            let x = ln - lp;
            let term = if x <= 1.0 {
                t_prev * (x.exp_m1() - x)
            } else {
                // t'·e^x can overflow when t' underflows; use t directly.
                ln.exp() - t_prev - t_prev * x
            };
            total += term.max(0.0);
        }
    }
    if !total.is_finite() {
        return Err(MixtureError::InfinitePenalty {
            observation: 0,
            component: 0,
        });
    }
    Ok(total)
}

/// `log Σ_j p_j φ(y | μ_j, Σ_j)`.
pub fn mixture_log_density(y: &DVector<f64>, theta: &MixtureParams) -> Result<f64> {
    if y.len() != theta.dim() {
        return Err(MixtureError::DimensionMismatch {
            expected: theta.dim(),
            found: y.len(),
            context: "point dimension".into(),
        });
    }
    let components = factorize(theta)?;
    let terms: Vec<f64> = components
        .iter()
        .zip(theta.proportions())
        .map(|(c, p)| p.ln() + c.log_density(y))
        .collect();
    Ok(log_sum_exp(&terms))
}

/// `t_ij(θ)` for every observation and component.
pub fn responsibilities(theta: &MixtureParams, data: &Dataset) -> Result<Responsibilities> {
    let joint = log_joint(theta, data)?;
    let (log_t, _) = normalize_rows(&joint)?;
    Ok(Responsibilities::from_log(log_t))
}

/// `L(θ | y) = Σ_i log Σ_j p_j φ(y_i | μ_j, Σ_j)`.
pub fn observed_log_likelihood(theta: &MixtureParams, data: &Dataset) -> Result<f64> {
    let joint = log_joint(theta, data)?;
    let (_, norms) = normalize_rows(&joint)?;
    Ok(norms.iter().sum())
}

/// `Λ(θ | y) = L(θ | y) − n(Σ p − 1)`.
pub fn modified_log_likelihood(theta: &MixtureParams, data: &Dataset) -> Result<f64> {
    let loglik = observed_log_likelihood(theta, data)?;
    Ok(loglik - data.len() as f64 * theta.constraint_residual())
}

/// `Q(θ | θ′) = Σ_i Σ_ℓ t_iℓ(θ′)[log p_ℓ + log φ(y_i | μ_ℓ, Σ_ℓ)]`.
pub fn q_function(
    theta: &MixtureParams,
    theta_prev: &MixtureParams,
    data: &Dataset,
) -> Result<f64> {
    theta.ensure_compatible(theta_prev)?;
    let weights = responsibilities(theta_prev, data)?;
    let joint = log_joint(theta, data)?;
    let mut total = 0.0;
    for i in 0..data.len() {
        for j in 0..theta.n_components() {
            let t = weights.get(i, j);
            if t > 0.0 {
                total += t * joint[(i, j)];
            }
        }
    }
    Ok(total)
}

/// Kullback penalty `D(θ, θ′ | y)`: the divergence of the complete-data
/// conditional law under `θ` from the one under `θ′`, taken under `θ′`.
pub fn kullback_penalty(
    theta: &MixtureParams,
    theta_prev: &MixtureParams,
    data: &Dataset,
) -> Result<f64> {
    theta.ensure_compatible(theta_prev)?;
    let prev = responsibilities(theta_prev, data)?;
    let next = responsibilities(theta, data)?;
    kl_log_matrices(prev.log_matrix(), next.log_matrix())
}

/// Diagnostics of `theta`, with `D` measured from `theta_prev` when given.
pub fn diagnostics(
    theta: &MixtureParams,
    theta_prev: Option<&MixtureParams>,
    data: &Dataset,
) -> Result<DiagnosticsRecord> {
    let loglik = observed_log_likelihood(theta, data)?;
    let residual = theta.constraint_residual();
    let kullback_penalty = match theta_prev {
        Some(prev) => kullback_penalty(theta, prev, data)?,
        None => 0.0,
    };
    Ok(DiagnosticsRecord {
        loglik,
        modified_loglik: loglik - data.len() as f64 * residual,
        kullback_penalty,
        constraint_residual: residual,
    })
}
