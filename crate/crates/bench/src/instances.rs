//! Seeded random problem instances for the invariant checks.

use cemm::{sample_mixture, Dataset, MixtureParams, Seed};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A dataset together with a starting point for fitting it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub truth: MixtureParams,
    pub data: Dataset,
    pub start: MixtureParams,
}

fn random_spd(rng: &mut ChaCha20Rng, dim: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let m = &a * a.transpose() * scale + DMatrix::identity(dim, dim) * (0.3 * scale);
    (&m + m.transpose()) * 0.5
}

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Random `J ∈ {1,2,3}`, `d ∈ {1,2}` instance with `n` observations. The
/// start lies on the simplex.
pub fn random_instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(7);
    let n_components = rng.random_range(1..=3usize);
    let dim = rng.random_range(1..=2usize);

    let truth = MixtureParams::new(
        normalized(
            (0..n_components)
                .map(|_| rng.random_range(0.2..1.0))
                .collect(),
        ),
        (0..n_components)
            .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-4.0..4.0)))
            .collect(),
        (0..n_components)
            .map(|_| random_spd(&mut rng, dim, 1.0))
            .collect(),
    )
    .expect("random truth is valid");
    let data = sample_mixture(&truth, n, Seed(seed)).expect("sampling succeeds");

    let spread = data.covariance();
    let start = MixtureParams::new(
        normalized(
            (0..n_components)
                .map(|_| rng.random_range(0.2..1.0))
                .collect(),
        ),
        (0..n_components)
            .map(|_| {
                let pick = rng.random_range(0..data.len());
                let jitter = DVector::from_fn(dim, |_, _| rng.random_range(-0.5..0.5));
                &data.observations()[pick] + jitter
            })
            .collect(),
        (0..n_components)
            .map(|_| {
                let factor = rng.random_range(0.5..2.0);
                let cov = &spread * factor + DMatrix::identity(dim, dim) * 1e-3;
                (&cov + cov.transpose()) * 0.5
            })
            .collect(),
    )
    .expect("random start is valid");

    Instance {
        seed,
        truth,
        data,
        start,
    }
}

/// Same instance with the start's proportions scaled off the simplex by a
/// seeded factor in `[0.5, 1.5)`.
pub fn off_simplex(instance: &Instance) -> MixtureParams {
    let mut rng = ChaCha20Rng::seed_from_u64(instance.seed);
    rng.set_stream(8);
    let factor: f64 = rng.random_range(0.5..1.5);
    let start = &instance.start;
    MixtureParams::new(
        start.proportions().iter().map(|p| p * factor).collect(),
        start.means().to_vec(),
        start.covariances().to_vec(),
    )
    .expect("scaled start is valid")
}
