use cemm::{
    em_cycle, kullback_penalty, modified_log_likelihood, observed_log_likelihood, q_function,
    responsibilities, Dataset, MixtureError, MixtureParams, RunConfig,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn spd(dim: usize, scales: &[f64], rho: f64) -> DMatrix<f64> {
    if dim == 1 {
        return DMatrix::from_element(1, 1, scales[0]);
    }
    let off = rho * (scales[0] * scales[1]).sqrt();
    DMatrix::from_row_slice(2, 2, &[scales[0], off, off, scales[1]])
}

/// Mixture with `J ∈ 1..=3`, `d ∈ 1..=2`; proportions unnormalized.
fn mixture() -> impl Strategy<Value = MixtureParams> {
    (1usize..=3, 1usize..=2).prop_flat_map(|(k, d)| {
        (
            prop::collection::vec(0.05f64..1.0, k),
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), k),
            prop::collection::vec((prop::collection::vec(0.2f64..3.0, 2), -0.8f64..0.8), k),
        )
            .prop_map(move |(p, mu, cov)| {
                MixtureParams::new(
                    p,
                    mu.into_iter().map(DVector::from_vec).collect(),
                    cov.iter().map(|(s, rho)| spd(d, s, *rho)).collect(),
                )
                .unwrap()
            })
    })
}

fn normalized(theta: &MixtureParams) -> MixtureParams {
    MixtureParams::new(
        theta.normalized_proportions(),
        theta.means().to_vec(),
        theta.covariances().to_vec(),
    )
    .unwrap()
}

fn data_for(theta: &MixtureParams, raw: &[Vec<f64>]) -> Dataset {
    let d = theta.dim();
    Dataset::new(
        raw.iter()
            .map(|v| DVector::from_column_slice(&v[..d]))
            .collect(),
        None,
    )
    .unwrap()
}

fn points() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-8.0f64..8.0, 2), 10..30)
}

/// `θ′` differing from `θ` in the block of component `j` only.
fn perturbed(theta: &MixtureParams, j: usize, shift: f64) -> MixtureParams {
    let mut means = theta.means().to_vec();
    means[j] = means[j].add_scalar(shift);
    MixtureParams::new(
        theta.proportions().to_vec(),
        means,
        theta.covariances().to_vec(),
    )
    .unwrap()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn responsibility_rows_sum_to_one(theta in mixture(), raw in points()) {
        let data = data_for(&theta, &raw);
        let t = responsibilities(&theta, &data).unwrap();
        for i in 0..data.len() {
            let row: f64 = (0..theta.n_components()).map(|j| t.get(i, j)).sum();
            prop_assert!((row - 1.0).abs() <= 1e-12, "row {i} sums to {row}");
            for j in 0..theta.n_components() {
                prop_assert!((0.0..=1.0).contains(&t.get(i, j)));
            }
        }
    }

    #[test]
    fn kullback_penalty_is_nonnegative(
        theta in mixture(), raw in points(), j in 0usize..3, shift in -2.0f64..2.0
    ) {
        let data = data_for(&theta, &raw);
        let other = perturbed(&theta, j % theta.n_components(), shift);
        prop_assert_eq!(kullback_penalty(&theta, &theta, &data).unwrap(), 0.0);
        match kullback_penalty(&other, &theta, &data) {
            Ok(d) => prop_assert!(d >= 0.0),
            Err(MixtureError::InfinitePenalty { .. }) => {}
            Err(err) => prop_assert!(false, "unexpected error {err}"),
        }
    }

    #[test]
    fn functionals_scale_under_replication(
        theta in mixture(), raw in points(), m in 2usize..4, shift in 0.1f64..1.0
    ) {
        let data = data_for(&theta, &raw);
        let big = data.replicate(m);
        let other = perturbed(&theta, 0, shift);
        let scale = m as f64;
        let pairs = [
            (observed_log_likelihood(&theta, &data).unwrap(), observed_log_likelihood(&theta, &big).unwrap()),
            (modified_log_likelihood(&theta, &data).unwrap(), modified_log_likelihood(&theta, &big).unwrap()),
            (q_function(&other, &theta, &data).unwrap(), q_function(&other, &theta, &big).unwrap()),
            (kullback_penalty(&other, &theta, &data).unwrap(), kullback_penalty(&other, &theta, &big).unwrap()),
        ];
        for (small, large) in pairs {
            prop_assert!(rel_close(scale * small, large, 1e-12), "{} × {small} vs {large}", m);
        }
    }

    #[test]
    fn em_ascent_identity(theta in mixture(), raw in points()) {
        let theta = normalized(&theta);
        let data = data_for(&theta, &raw);
        let next = match em_cycle(&theta, &data, &RunConfig::default()) {
            Ok(next) => next,
            Err(MixtureError::EmptyComponent { .. }) => return Ok(()),
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        let gain = observed_log_likelihood(&next, &data).unwrap()
            - observed_log_likelihood(&theta, &data).unwrap();
        let q_gain = q_function(&next, &theta, &data).unwrap() - q_function(&theta, &theta, &data).unwrap();
        let scale = 1.0 + observed_log_likelihood(&theta, &data).unwrap().abs();
        prop_assert!(q_gain >= -1e-9 * scale, "Q decreased by {q_gain}");
        prop_assert!(gain >= q_gain - 1e-9 * scale, "ΔL = {gain} < ΔQ = {q_gain}");
    }

    #[test]
    fn loglik_is_q_plus_entropy(theta in mixture(), raw in points()) {
        let theta = normalized(&theta);
        let data = data_for(&theta, &raw);
        let t = responsibilities(&theta, &data).unwrap();
        let entropy: f64 = (0..data.len())
            .flat_map(|i| (0..theta.n_components()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let v = t.get(i, j);
                if v > 0.0 { v * v.ln() } else { 0.0 }
            })
            .sum();
        let l = observed_log_likelihood(&theta, &data).unwrap();
        let q = q_function(&theta, &theta, &data).unwrap();
        prop_assert!((l - (q - entropy)).abs() <= 1e-9 * (1.0 + l.abs()), "{l} vs {}", q - entropy);
    }

    #[test]
    fn single_block_change_gives_positive_penalty(
        theta in mixture(), raw in points(), j in 0usize..3, shift in prop_oneof![-1.0f64..-1e-3, 1e-3f64..1.0]
    ) {
        prop_assume!(theta.n_components() >= 2);
        let data = data_for(&theta, &raw);
        let other = perturbed(&theta, j % theta.n_components(), shift);
        match kullback_penalty(&other, &theta, &data) {
            Ok(d) => prop_assert!(d > 0.0, "D = {d} for shift {shift}"),
            Err(MixtureError::InfinitePenalty { .. }) => {}
            Err(err) => prop_assert!(false, "unexpected error {err}"),
        }
    }
}

#[test]
fn responsibilities_stay_normalized_forty_deviations_out() {
    let theta =
        MixtureParams::univariate(&[0.2, 0.3, 0.5], &[0.0, 1.0, 2.0], &[1.0, 0.5, 2.0]).unwrap();
    let data = Dataset::univariate(&[-40.0, 42.0 * 2f64.sqrt(), 1.0]).unwrap();
    let t = responsibilities(&theta, &data).unwrap();
    for i in 0..data.len() {
        let row: f64 = (0..3).map(|j| t.get(i, j)).sum();
        assert!(row.is_finite() && (row - 1.0).abs() <= 1e-12);
    }
    assert!(observed_log_likelihood(&theta, &data).unwrap().is_finite());
}
