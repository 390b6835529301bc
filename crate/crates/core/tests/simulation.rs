use cemm::{
    benchmark_scenario, init_moment, read_dataset, sample_mixture, write_dataset, Dataset,
    MixtureParams, Seed,
};
use nalgebra::{DMatrix, DVector};

#[test]
fn well_separated_large_sample_matches_truth() {
    let truth = benchmark_scenario("well_separated").unwrap().true_params;
    let data = sample_mixture(&truth, 30_000, Seed(1)).unwrap();
    let labels = data.labels().unwrap();
    for (j, target) in [0.0, 3.0, 6.0].into_iter().enumerate() {
        let members: Vec<f64> = data
            .observations()
            .iter()
            .zip(labels)
            .filter(|(_, &z)| z == j)
            .map(|(y, _)| y[0])
            .collect();
        let frequency = members.len() as f64 / data.len() as f64;
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        assert!(
            (frequency - 1.0 / 3.0).abs() <= 0.01,
            "component {j}: frequency {frequency}"
        );
        assert!((mean - target).abs() <= 0.05, "component {j}: mean {mean}");
    }
}

#[test]
fn overlapping_pooled_variance_exceeds_one() {
    let truth = benchmark_scenario("overlapping").unwrap().true_params;
    for seed in 1..=5 {
        let data = sample_mixture(&truth, 300, Seed(seed)).unwrap();
        let var = data.covariance()[(0, 0)];
        assert!(var > 1.0, "seed {seed}: pooled variance {var}");
    }
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let truth = benchmark_scenario("overlapping").unwrap().true_params;
    let data = sample_mixture(&truth, 300, Seed(9)).unwrap();
    let path = dir.path().join("sample.csv");
    write_dataset(&data, &path).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.labels(), data.labels());
    for (a, b) in back.observations().iter().zip(data.observations()) {
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }

    let bivariate = MixtureParams::new(
        vec![0.4, 0.6],
        vec![
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![-2.0, 3.0]),
        ],
        vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]),
            DMatrix::identity(2, 2) * 1e-3,
        ],
    )
    .unwrap();
    let data = sample_mixture(&bivariate, 50, Seed(2)).unwrap();
    let unlabelled = Dataset::new(data.observations().to_vec(), None).unwrap();
    write_dataset(&unlabelled, &path).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), unlabelled);
    let header = std::fs::read_to_string(&path).unwrap();
    assert_eq!(header.lines().next(), Some("y_1,y_2"));
}

#[test]
fn moment_start_on_benchmark_sample() {
    let truth = benchmark_scenario("well_separated").unwrap().true_params;
    let data = sample_mixture(&truth, 300, Seed(7)).unwrap();
    let mean = data.mean()[0];
    let var = data.covariance()[(0, 0)];
    let start = init_moment(&data, 3).unwrap();
    let means: Vec<f64> = start.means().iter().map(|m| m[0]).collect();
    assert_eq!(means, vec![mean - var.sqrt(), mean, mean + var.sqrt()]);
    assert!(start.covariances().iter().all(|c| c[(0, 0)] == var));
}
