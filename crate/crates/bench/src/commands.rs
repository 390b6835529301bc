//! Subcommand implementations. Each returns the text it prints so tests can
//! inspect it; the binary forwards it to stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use cemm::{
    benchmark_scenario, init_moment, read_dataset, run, sample_mixture, write_dataset, Algorithm,
    Dataset, MixtureParams, Seed, StopReason, Trajectory,
};
use rayon::prelude::*;

use crate::checks::run_checks;
use crate::config::{DataSource, ExperimentSpec, InitSpec};
use crate::report::{
    combined_trajectory_csv, comparison_row, final_params_toml, median, params_table,
    trajectory_csv, write_atomic, COMPARISON_HEADER, SUMMARY_HEADER,
};
use crate::HarnessError;

/// A dataset to fit, tagged with its seed (`None` for a file).
struct Sample {
    seed: Option<u64>,
    data: Dataset,
}

impl Sample {
    fn seed_label(&self) -> String {
        self.seed.map(|s| s.to_string()).unwrap_or_default()
    }
}

fn samples(spec: &ExperimentSpec) -> Result<Vec<Sample>, HarnessError> {
    match &spec.source {
        DataSource::File(path) => Ok(vec![Sample {
            seed: None,
            data: read_dataset(path)?,
        }]),
        DataSource::Scenario { name, n, seeds } => {
            let truth = benchmark_scenario(name.as_str())?.true_params;
            seeds
                .iter()
                .map(|&seed| {
                    Ok(Sample {
                        seed: Some(seed),
                        data: sample_mixture(&truth, *n, Seed(seed))?,
                    })
                })
                .collect()
        }
    }
}

fn starting_point(init: &InitSpec, data: &Dataset) -> Result<MixtureParams, HarnessError> {
    match init {
        InitSpec::Moment { components } => Ok(init_moment(data, *components)?),
        InitSpec::Explicit(theta) => {
            if theta.dim() != data.dim() {
                return Err(HarnessError::Usage(format!(
                    "explicit start has dimension {}, data has {}",
                    theta.dim(),
                    data.dim()
                )));
            }
            Ok(theta.clone())
        }
    }
}

fn ensure_out_dir(spec: &ExperimentSpec) -> Result<&PathBuf, HarnessError> {
    fs::create_dir_all(&spec.out)?;
    Ok(&spec.out)
}

/// Writes one CSV per seed to the output directory.
pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<String, HarnessError> {
    let DataSource::Scenario { name, n, .. } = &spec.source else {
        return Err(HarnessError::Usage("simulate requires --scenario".into()));
    };
    let out_dir = ensure_out_dir(spec)?;
    let mut report = String::new();
    for sample in samples(spec)? {
        let seed = sample.seed.expect("scenario samples carry a seed");
        let path = out_dir.join(format!("{name}_n{n}_seed{seed}.csv"));
        write_dataset(&sample.data, &path)?;
        let mean = sample.data.mean();
        let cov = sample.data.covariance();
        let _ = writeln!(
            report,
            "{}: n = {}, mean = {:.6}, variance = {:.6}",
            path.display(),
            sample.data.len(),
            mean[0],
            cov[(0, 0)]
        );
    }
    Ok(report)
}

/// Fits one dataset with one algorithm. The trajectory and final-parameter
/// files are written even when the run ends in a numerical failure, which
/// is then returned as the error.
pub fn cmd_fit(spec: &ExperimentSpec) -> Result<String, HarnessError> {
    let [algorithm] = spec.algorithms[..] else {
        return Err(HarnessError::Usage(
            "fit takes exactly one algorithm".into(),
        ));
    };
    let mut all = samples(spec)?;
    if all.len() != 1 {
        return Err(HarnessError::Usage("fit takes exactly one seed".into()));
    }
    let sample = all.remove(0);
    let start = starting_point(&spec.init, &sample.data)?;
    let trajectory = run(&start, &sample.data, &spec.run_config(algorithm))?;

    let out_dir = ensure_out_dir(spec)?;
    write_atomic(
        &out_dir.join("trajectory.csv"),
        trajectory_csv(&trajectory).as_bytes(),
    )?;
    write_atomic(
        &out_dir.join("final_params.toml"),
        final_params_toml(&trajectory)?.as_bytes(),
    )?;

    let last = &trajectory.last().diagnostics;
    let mut report = format!(
        "{algorithm}: {} after {} cycles, L = {:.10}, Λ = {:.10}, Σp − 1 = {:.3e}\n",
        trajectory.stop_reason.label(),
        trajectory.cycles_run,
        last.loglik,
        last.modified_loglik,
        last.constraint_residual
    );
    report.push_str(&params_table(&trajectory.final_params));
    match trajectory.stop_reason.failure() {
        Some(err) => {
            eprint!("{report}");
            Err(err.into())
        }
        None => Ok(report),
    }
}

/// Runs every (algorithm, seed) pair, in parallel, and writes
/// `comparison.csv`, `trajectory_<alg>.csv` per algorithm and
/// `summary.csv`. Output order is fixed by algorithm then seed.
pub fn cmd_compare(spec: &ExperimentSpec) -> Result<String, HarnessError> {
    if spec.algorithms.len() < 2 {
        return Err(HarnessError::Usage(
            "compare needs at least two algorithms".into(),
        ));
    }
    let samples = samples(spec)?;
    let starts: Vec<MixtureParams> = samples
        .iter()
        .map(|s| starting_point(&spec.init, &s.data))
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(Algorithm, usize)> = spec
        .algorithms
        .iter()
        .flat_map(|&alg| (0..samples.len()).map(move |i| (alg, i)))
        .collect();
    let results: Vec<Trajectory> = jobs
        .par_iter()
        .map(|&(alg, i)| run(&starts[i], &samples[i].data, &spec.run_config(alg)))
        .collect::<Result<_, _>>()?;

    let out_dir = ensure_out_dir(spec)?;
    let mut comparison = format!("{COMPARISON_HEADER}\n");
    let mut summary = format!("{SUMMARY_HEADER}\n");
    let mut report = format!(
        "{:<6} {:>6} {:>10} {:>14}\n",
        "alg", "runs", "converged", "median cycles"
    );
    let mut failures = Vec::new();
    for (a, &alg) in spec.algorithms.iter().enumerate() {
        let runs = &results[a * samples.len()..(a + 1) * samples.len()];
        for (sample, traj) in samples.iter().zip(runs) {
            comparison.push_str(&comparison_row(&sample.seed_label(), traj));
            if let StopReason::NumericalFailure { .. } = traj.stop_reason {
                failures.push(format!(
                    "{alg} seed {}: {}",
                    sample.seed_label(),
                    traj.stop_reason.failure().expect("failure present")
                ));
            }
        }
        let labels: Vec<String> = samples.iter().map(Sample::seed_label).collect();
        let combined = combined_trajectory_csv(labels.iter().map(String::as_str).zip(runs));
        write_atomic(
            &out_dir.join(format!("trajectory_{}.csv", alg.name().to_lowercase())),
            combined.as_bytes(),
        )?;
        let cycles: Vec<usize> = runs.iter().map(|t| t.cycles_run).collect();
        let converged = runs.iter().filter(|t| t.converged).count();
        let med = median(&cycles);
        let _ = writeln!(summary, "{alg},{},{converged},{med}", runs.len());
        let _ = writeln!(
            report,
            "{:<6} {:>6} {converged:>10} {med:>14}",
            alg.name(),
            runs.len()
        );
    }
    write_atomic(&out_dir.join("comparison.csv"), comparison.as_bytes())?;
    write_atomic(&out_dir.join("summary.csv"), summary.as_bytes())?;

    if let Some(first) = failures.first() {
        eprint!("{report}");
        return Err(HarnessError::RunsFailed {
            failed: failures.len(),
            first: first.clone(),
        });
    }
    Ok(report)
}

/// Runs the invariant suite; fails if any check fails.
pub fn cmd_checks() -> Result<String, HarnessError> {
    let results = run_checks();
    let mut report = String::new();
    for check in &results {
        let _ = writeln!(
            report,
            "{} {:<28} margin {:>11.3e}  {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.margin,
            check.detail
        );
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        eprint!("{report}");
        return Err(HarnessError::ChecksFailed {
            failed,
            total: results.len(),
        });
    }
    Ok(report)
}
