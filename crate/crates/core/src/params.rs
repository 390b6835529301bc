//! Parameter and data containers.

use nalgebra::{DMatrix, DVector};

use crate::density::Gaussian;
use crate::error::{MixtureError, Result};

/// Relative tolerance used when validating covariance symmetry of
/// user-supplied matrices. Internal updates symmetrize exactly.
const SYMMETRY_TOL: f64 = 1e-10;

/// Full parameter vector of a `J`-component Gaussian mixture in `R^d`.
///
/// Proportions are strictly positive but are **not** required to sum to one:
/// the component-wise algorithm moves off the simplex between cycles. Callers
/// that need a probability vector must normalize explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    proportions: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
}

impl MixtureParams {
    /// Validates shapes, positivity, symmetry and positive definiteness.
    pub fn new(
        proportions: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let n_components = proportions.len();
        if n_components == 0 {
            return Err(MixtureError::InvalidParams(
                "proportions: at least one component is required".into(),
            ));
        }
        if means.len() != n_components {
            return Err(MixtureError::InvalidParams(format!(
                "means: expected {n_components} vectors, got {}",
                means.len()
            )));
        }
        if covariances.len() != n_components {
            return Err(MixtureError::InvalidParams(format!(
                "covariances: expected {n_components} matrices, got {}",
                covariances.len()
            )));
        }
        let dim = means[0].len();
        if dim == 0 {
            return Err(MixtureError::InvalidParams(
                "means: dimension must be >= 1".into(),
            ));
        }
        for (j, &p) in proportions.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(MixtureError::InvalidParams(format!(
                    "proportions[{j}] = {p} must be finite and strictly positive"
                )));
            }
        }
        for (j, mean) in means.iter().enumerate() {
            if mean.len() != dim {
                return Err(MixtureError::InvalidParams(format!(
                    "means[{j}] has dimension {}, expected {dim}",
                    mean.len()
                )));
            }
            if mean.iter().any(|v| !v.is_finite()) {
                return Err(MixtureError::InvalidParams(format!(
                    "means[{j}] is not finite"
                )));
            }
        }
        for (j, cov) in covariances.iter().enumerate() {
            if cov.nrows() != dim || cov.ncols() != dim {
                return Err(MixtureError::InvalidParams(format!(
                    "covariances[{j}] is {}x{}, expected {dim}x{dim}",
                    cov.nrows(),
                    cov.ncols()
                )));
            }
            if cov.iter().any(|v| !v.is_finite()) {
                return Err(MixtureError::InvalidParams(format!(
                    "covariances[{j}] is not finite"
                )));
            }
            for r in 0..dim {
                for c in (r + 1)..dim {
                    let (a, b) = (cov[(r, c)], cov[(c, r)]);
                    if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                        return Err(MixtureError::InvalidParams(format!(
                            "covariances[{j}] is not symmetric at ({r},{c}): {a} vs {b}"
                        )));
                    }
                }
            }
            Gaussian::new(&means[j], cov).map_err(|err| match err {
                MixtureError::DegenerateCovariance { reason, .. } => {
                    MixtureError::DegenerateCovariance {
                        component: j,
                        reason,
                    }
                }
                other => other,
            })?;
        }
        Ok(Self {
            proportions,
            means,
            covariances,
        })
    }

    /// Convenience constructor for `d = 1`, taking variances.
    pub fn univariate(proportions: &[f64], means: &[f64], variances: &[f64]) -> Result<Self> {
        Self::new(
            proportions.to_vec(),
            means.iter().map(|&m| DVector::from_element(1, m)).collect(),
            variances
                .iter()
                .map(|&v| DMatrix::from_element(1, 1, v))
                .collect(),
        )
    }

    pub fn n_components(&self) -> usize {
        self.proportions.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[DMatrix<f64>] {
        &self.covariances
    }

    pub fn proportion_sum(&self) -> f64 {
        self.proportions.iter().sum()
    }

    /// `Σ_ℓ p_ℓ − 1`.
    pub fn constraint_residual(&self) -> f64 {
        self.proportion_sum() - 1.0
    }

    /// Copy of the proportions rescaled to sum to one.
    pub fn normalized_proportions(&self) -> Vec<f64> {
        let total = self.proportion_sum();
        self.proportions.iter().map(|p| p / total).collect()
    }

    /// Returns an error unless the proportions sum to one within `tolerance`.
    pub fn check_simplex(&self, tolerance: f64) -> Result<()> {
        let sum = self.proportion_sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(MixtureError::InvalidProportions { sum, tolerance });
        }
        Ok(())
    }

    /// Flattened `(p, μ, Σ)` vector, components in order, covariance entries
    /// row-major (both triangles).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.proportions.clone();
        for mean in &self.means {
            flat.extend(mean.iter());
        }
        for cov in &self.covariances {
            for r in 0..cov.nrows() {
                for c in 0..cov.ncols() {
                    flat.push(cov[(r, c)]);
                }
            }
        }
        flat
    }

    /// Euclidean norm of the flattened parameter vector.
    pub fn norm(&self) -> f64 {
        self.to_flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance between flattened parameter vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Replaces the block `(p_j, μ_j, Σ_j)`; callers guarantee validity.
    pub(crate) fn set_block(
        &mut self,
        j: usize,
        proportion: f64,
        mean: DVector<f64>,
        covariance: DMatrix<f64>,
    ) {
        self.proportions[j] = proportion;
        self.means[j] = mean;
        self.covariances[j] = covariance;
    }

    pub(crate) fn set_location(&mut self, j: usize, mean: DVector<f64>, covariance: DMatrix<f64>) {
        self.means[j] = mean;
        self.covariances[j] = covariance;
    }

    pub(crate) fn set_proportions(&mut self, proportions: Vec<f64>) {
        debug_assert_eq!(proportions.len(), self.proportions.len());
        self.proportions = proportions;
    }

    pub(crate) fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self.n_components() != other.n_components() {
            return Err(MixtureError::DimensionMismatch {
                expected: self.n_components(),
                found: other.n_components(),
                context: "component count".into(),
            });
        }
        if self.dim() != other.dim() {
            return Err(MixtureError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
                context: "parameter dimension".into(),
            });
        }
        Ok(())
    }
}

/// Observed sample `y_1..y_n`, optionally with the generating labels.
///
/// Labels are zero-based component indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<DVector<f64>>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(observations: Vec<DVector<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        if observations.is_empty() {
            return Err(MixtureError::InvalidDataset(
                "at least one observation is required".into(),
            ));
        }
        let dim = observations[0].len();
        if dim == 0 {
            return Err(MixtureError::InvalidDataset(
                "observations must have dimension >= 1".into(),
            ));
        }
        for (i, y) in observations.iter().enumerate() {
            if y.len() != dim {
                return Err(MixtureError::InvalidDataset(format!(
                    "observation {i} has dimension {}, expected {dim}",
                    y.len()
                )));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(MixtureError::InvalidDataset(format!(
                    "observation {i} is not finite"
                )));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != observations.len() {
                return Err(MixtureError::InvalidDataset(format!(
                    "{} labels for {} observations",
                    labels.len(),
                    observations.len()
                )));
            }
        }
        Ok(Self {
            observations,
            labels,
        })
    }

    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&v| DVector::from_element(1, v))
                .collect(),
            None,
        )
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observations[0].len()
    }

    pub fn observations(&self) -> &[DVector<f64>] {
        &self.observations
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Empirical mean of the observations.
    pub fn mean(&self) -> DVector<f64> {
        let mut sum = DVector::zeros(self.dim());
        for y in &self.observations {
            sum += y;
        }
        sum / self.len() as f64
    }

    /// Maximum-likelihood (`1/n`) sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut scatter = DMatrix::zeros(self.dim(), self.dim());
        for y in &self.observations {
            let centered = y - &mean;
            scatter += &centered * centered.transpose();
        }
        scatter / self.len() as f64
    }

    /// Concatenation of `times` copies of this dataset.
    pub fn replicate(&self, times: usize) -> Self {
        let mut observations = Vec::with_capacity(self.len() * times);
        let mut labels = self
            .labels
            .as_ref()
            .map(|_| Vec::with_capacity(self.len() * times));
        for _ in 0..times {
            observations.extend(self.observations.iter().cloned());
            if let (Some(out), Some(src)) = (labels.as_mut(), self.labels.as_ref()) {
                out.extend_from_slice(src);
            }
        }
        Self {
            observations,
            labels,
        }
    }

    pub(crate) fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(MixtureError::DimensionMismatch {
                expected: dim,
                found: self.dim(),
                context: "observation dimension".into(),
            });
        }
        Ok(())
    }
}
