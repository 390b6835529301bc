//! Benchmark scenarios, seeded mixture sampling and starting points.
//!
//! Sampling uses ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Two streams are derived from the same key:
//! stream 0 draws the component labels (one uniform per observation),
//! stream 1 draws the standard-normal innovations (`d` per observation, via
//! `rand_distr::StandardNormal`). Observation `i` is `μ_z + L·e` with `L`
//! the lower Cholesky factor of `Σ_z`.

pub mod io;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{MixtureError, Result};
use crate::params::{Dataset, MixtureParams};

pub use io::{read_dataset, read_dataset_from, write_dataset, write_dataset_to};

const LABEL_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    WellSeparated,
    Overlapping,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::WellSeparated => "well_separated",
            ScenarioName::Overlapping => "overlapping",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = MixtureError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "well_separated" | "well-separated" => Ok(ScenarioName::WellSeparated),
            "overlapping" => Ok(ScenarioName::Overlapping),
            other => Err(MixtureError::UnknownScenario(other.to_string())),
        }
    }
}

/// A named three-component univariate benchmark mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub true_params: MixtureParams,
    pub default_n: usize,
}

/// Equal proportions; means 0, 3, 6 with unit variances (`well_separated`),
/// or means 0, 3, 3 with variances 1, 1, 4 (`overlapping`).
pub fn benchmark_scenario(name: &str) -> Result<Scenario> {
    let name: ScenarioName = name.parse()?;
    let third = 1.0 / 3.0;
    // Σp must be exactly 1: 1/3 + 1/3 + (1 − 2/3).
    let proportions = [third, third, 1.0 - 2.0 * third];
    debug_assert_eq!(proportions.iter().sum::<f64>(), 1.0);
    let true_params = match name {
        ScenarioName::WellSeparated => {
            MixtureParams::univariate(&proportions, &[0.0, 3.0, 6.0], &[1.0, 1.0, 1.0])?
        }
        ScenarioName::Overlapping => {
            MixtureParams::univariate(&proportions, &[0.0, 3.0, 3.0], &[1.0, 1.0, 4.0])?
        }
    };
    Ok(Scenario {
        name,
        true_params,
        default_n: 300,
    })
}

/// Draws `n` labelled observations from `theta`.
pub fn sample_mixture(theta: &MixtureParams, n: usize, seed: Seed) -> Result<Dataset> {
    theta.check_simplex(1e-12)?;
    if n == 0 {
        return Err(MixtureError::InvalidDataset(
            "sample size must be >= 1".into(),
        ));
    }
    let factors: Vec<DMatrix<f64>> = theta
        .covariances()
        .iter()
        .enumerate()
        .map(|(j, cov)| {
            cov.clone().cholesky().map(|c| c.unpack()).ok_or_else(|| {
                MixtureError::DegenerateCovariance {
                    component: j,
                    reason: "Cholesky factorization failed".into(),
                }
            })
        })
        .collect::<Result<_>>()?;

    let mut label_rng = ChaCha20Rng::seed_from_u64(seed.0);
    label_rng.set_stream(LABEL_STREAM);
    let mut noise_rng = ChaCha20Rng::seed_from_u64(seed.0);
    noise_rng.set_stream(NOISE_STREAM);

    let dim = theta.dim();
    let last = theta.n_components() - 1;
    let mut observations = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = label_rng.random();
        let mut cumulative = 0.0;
        let mut label = last;
        for (j, p) in theta.proportions().iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                label = j;
                break;
            }
        }
        let noise = DVector::from_fn(dim, |_, _| noise_rng.sample::<f64, _>(StandardNormal));
        observations.push(&theta.means()[label] + &factors[label] * noise);
        labels.push(label);
    }
    Dataset::new(observations, Some(labels))
}

/// Moment-based start for univariate data: equal proportions, means spread
/// evenly over `[x̄ − s, x̄ + s]` (just `x̄` when `J = 1`), all variances
/// `s²`, where `x̄` and `s²` are the sample mean and (`1/n`) variance.
pub fn init_moment(data: &Dataset, n_components: usize) -> Result<MixtureParams> {
    if data.dim() != 1 {
        return Err(MixtureError::DimensionUnsupported(data.dim()));
    }
    if n_components == 0 {
        return Err(MixtureError::InvalidParams(
            "component count must be >= 1".into(),
        ));
    }
    let mean = data.mean()[0];
    let variance = data.covariance()[(0, 0)];
    let sd = variance.sqrt();
    let means: Vec<f64> = (0..n_components)
        .map(|j| {
            if n_components == 1 {
                mean
            } else {
                let c = -1.0 + 2.0 * j as f64 / (n_components - 1) as f64;
                mean + c * sd
            }
        })
        .collect();
    MixtureParams::univariate(
        &vec![1.0 / n_components as f64; n_components],
        &means,
        &vec![variance; n_components],
    )
}

/// Starting point given explicitly; every field is validated.
pub fn init_explicit(
    proportions: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
) -> Result<MixtureParams> {
    MixtureParams::new(proportions, means, covariances)
}

/// The far-from-truth start used for the overlapping benchmark:
/// equal proportions, means `0, 0.1, 0.2`, unit variances.
pub fn overlapping_start() -> MixtureParams {
    let third = 1.0 / 3.0;
    MixtureParams::univariate(
        &[third, third, 1.0 - 2.0 * third],
        &[0.0, 0.1, 0.2],
        &[1.0; 3],
    )
    .expect("constant start is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenarios() {
        let ws = benchmark_scenario("well_separated").unwrap();
        let means: Vec<f64> = ws.true_params.means().iter().map(|m| m[0]).collect();
        assert_eq!(means, vec![0.0, 3.0, 6.0]);
        assert_eq!(ws.true_params.proportion_sum(), 1.0);
        assert_eq!(ws.default_n, 300);
        let ov = benchmark_scenario("overlapping").unwrap();
        let vars: Vec<f64> = ov
            .true_params
            .covariances()
            .iter()
            .map(|c| c[(0, 0)])
            .collect();
        let means: Vec<f64> = ov.true_params.means().iter().map(|m| m[0]).collect();
        assert_eq!(vars, vec![1.0, 1.0, 4.0]);
        assert_eq!(means, vec![0.0, 3.0, 3.0]);
        assert!((ov.true_params.proportions()[2] - 1.0 / 3.0).abs() < 1e-16);
        assert!(matches!(
            benchmark_scenario("nonexistent"),
            Err(MixtureError::UnknownScenario(_))
        ));
    }

    #[test]
    fn single_component_sample() {
        let theta = MixtureParams::univariate(&[1.0], &[2.0], &[0.5]).unwrap();
        let data = sample_mixture(&theta, 50, Seed(3)).unwrap();
        assert!(data.labels().unwrap().iter().all(|&z| z == 0));
        assert_eq!(data.len(), 50);
    }

    #[test]
    fn sampling_is_deterministic_and_seed_dependent() {
        let theta = benchmark_scenario("overlapping").unwrap().true_params;
        let a = sample_mixture(&theta, 100, Seed(11)).unwrap();
        let b = sample_mixture(&theta, 100, Seed(11)).unwrap();
        let c = sample_mixture(&theta, 100, Seed(12)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_requires_simplex() {
        let theta = MixtureParams::univariate(&[0.6, 0.6], &[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            sample_mixture(&theta, 10, Seed(1)),
            Err(MixtureError::InvalidProportions { .. })
        ));
    }

    #[test]
    fn moment_init_three_components() {
        // x̄ = 2, s² = 1.
        let data = Dataset::univariate(&[1.0, 3.0, 1.0, 3.0]).unwrap();
        let theta = init_moment(&data, 3).unwrap();
        let means: Vec<f64> = theta.means().iter().map(|m| m[0]).collect();
        assert_eq!(means, vec![1.0, 2.0, 3.0]);
        assert!(theta.covariances().iter().all(|c| c[(0, 0)] == 1.0));
        assert!(theta.proportions().iter().all(|&p| p == 1.0 / 3.0));
        let single = init_moment(&data, 1).unwrap();
        assert_eq!(single.means()[0][0], 2.0);
        assert_eq!(single.covariances()[0][(0, 0)], 1.0);
        assert_eq!(single.proportions(), &[1.0]);
    }

    #[test]
    fn moment_init_rejects_multivariate() {
        let data =
            Dataset::new(vec![DVector::zeros(2), DVector::from_element(2, 1.0)], None).unwrap();
        assert_eq!(
            init_moment(&data, 3).unwrap_err(),
            MixtureError::DimensionUnsupported(2)
        );
    }

    #[test]
    fn explicit_init_validation() {
        let start = overlapping_start();
        let means: Vec<f64> = start.means().iter().map(|m| m[0]).collect();
        assert_eq!(means, vec![0.0, 0.1, 0.2]);
        assert_eq!(start.proportion_sum(), 1.0);
        let bad = init_explicit(
            vec![-0.5, 1.5],
            vec![DVector::zeros(1), DVector::zeros(1)],
            vec![DMatrix::identity(1, 1), DMatrix::identity(1, 1)],
        );
        assert!(matches!(bad, Err(MixtureError::InvalidParams(_))));
        let asym = init_explicit(
            vec![1.0],
            vec![DVector::zeros(2)],
            vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.3, 1.0])],
        );
        assert!(matches!(asym, Err(MixtureError::InvalidParams(_))));
    }
}
