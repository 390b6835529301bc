//! The invariant suite behind `cemm-bench checks`.

use cemm::{
    benchmark_scenario, component_schedule, kullback_penalty, modified_log_likelihood,
    observed_log_likelihood, overlapping_start, responsibilities, run, sample_mixture, Algorithm,
    Dataset, MixtureError, MixtureParams, RunConfig, Seed, Stepper, StopReason,
};

use crate::instances::{off_simplex, random_instance};
use crate::oracle;

/// Outcome of one named check. `margin` is the slack to the threshold:
/// non-negative when the check holds.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

impl CheckResult {
    fn from_margin(name: &'static str, margin: f64, detail: String) -> Self {
        CheckResult {
            name,
            passed: margin >= 0.0,
            margin,
            detail,
        }
    }

    fn failed(name: &'static str, err: impl std::fmt::Display) -> Self {
        CheckResult {
            name,
            passed: false,
            margin: f64::NEG_INFINITY,
            detail: format!("error: {err}"),
        }
    }
}

const INSTANCES: u64 = 20;

pub fn run_checks() -> Vec<CheckResult> {
    vec![
        oracle_equivalence(),
        em_monotonicity(),
        cemm_proximal_inequality(),
        constraint_recovery(),
        cost_parity(),
        guarded_empty_component(),
        extreme_row_stochasticity(),
    ]
}

fn named<T>(
    name: &'static str,
    body: impl FnOnce() -> cemm::Result<T>,
    finish: impl FnOnce(T) -> CheckResult,
) -> CheckResult {
    match body() {
        Ok(value) => finish(value),
        Err(err) => CheckResult::failed(name, err),
    }
}

fn oracle_equivalence() -> CheckResult {
    const NAME: &str = "oracle_equivalence";
    const TOL: f64 = 1e-12;
    named(
        NAME,
        || {
            let (theta, y) = oracle::toy_instance();
            let params = MixtureParams::univariate(&theta.p, &theta.mu, &theta.var)?;
            let data = Dataset::univariate(&y)?;
            let cfg = RunConfig {
                variance_floor: Some(0.0),
                ..RunConfig::default()
            };
            let mut worst = oracle::max_abs_diff(
                &oracle::from_params(&cemm::em_cycle(&params, &data, &cfg)?),
                &oracle::em_step(&theta, &y),
            );
            for j in 0..theta.p.len() {
                let got = cemm::cemm_iteration(&params, &data, j, &cfg)?;
                worst = worst.max(oracle::max_abs_diff(
                    &oracle::from_params(&got),
                    &oracle::cemm_step(&theta, &y, j),
                ));
            }
            worst = worst.max(oracle::max_abs_diff(
                &oracle::from_params(&cemm::sage_cycle(&params, &data, &cfg)?),
                &oracle::sage_step(&theta, &y),
            ));
            Ok(worst)
        },
        |worst| CheckResult::from_margin(NAME, TOL - worst, format!("max |Δθ| = {worst:.3e}")),
    )
}

fn em_monotonicity() -> CheckResult {
    const NAME: &str = "em_monotonicity";
    named(
        NAME,
        || {
            let mut margin = f64::INFINITY;
            let mut worst_simplex: f64 = 0.0;
            for seed in 0..INSTANCES {
                let inst = random_instance(seed, 50);
                let mut stepper = Stepper::new(inst.start.clone(), &inst.data, 1e-6)?;
                let mut previous = stepper.log_likelihood()?;
                for _ in 0..30 {
                    stepper.em_cycle()?;
                    let current = stepper.log_likelihood()?;
                    margin = margin.min(current - previous + 1e-9 * (1.0 + previous.abs()));
                    worst_simplex = worst_simplex.max(stepper.params().constraint_residual().abs());
                    previous = current;
                }
            }
            Ok((margin, worst_simplex))
        },
        |(margin, simplex)| {
            CheckResult::from_margin(
                NAME,
                margin.min(1e-12 - simplex),
                format!("min ΔL slack {margin:.3e}, max |Σp−1| {simplex:.3e}"),
            )
        },
    )
}

fn cemm_proximal_inequality() -> CheckResult {
    const NAME: &str = "cemm_proximal_inequality";
    named(
        NAME,
        || {
            let mut margin = f64::INFINITY;
            let mut min_penalty = f64::INFINITY;
            for seed in 0..INSTANCES {
                let inst = random_instance(seed, 50);
                let mut stepper = Stepper::new(off_simplex(&inst), &inst.data, 1e-6)?;
                let j_count = stepper.params().n_components();
                for _ in 0..10 * j_count {
                    let before = stepper.params().clone();
                    let k = stepper.iteration();
                    stepper.cemm_iteration(component_schedule(k, j_count))?;
                    stepper.set_iteration(k + 1);
                    let after = stepper.params();
                    let lambda_before = modified_log_likelihood(&before, &inst.data)?;
                    let lambda_after = modified_log_likelihood(after, &inst.data)?;
                    let penalty = kullback_penalty(after, &before, &inst.data)?;
                    margin = margin.min(
                        lambda_after - lambda_before - penalty + 1e-8 * (1.0 + lambda_before.abs()),
                    );
                    min_penalty = min_penalty.min(penalty);
                }
            }
            Ok((margin, min_penalty))
        },
        |(margin, min_penalty)| CheckResult {
            name: NAME,
            passed: margin >= 0.0 && min_penalty >= 0.0,
            margin,
            detail: format!("min ΔΛ − D slack {margin:.3e}, min D {min_penalty:.3e}"),
        },
    )
}

fn constraint_recovery() -> CheckResult {
    const NAME: &str = "constraint_recovery";
    named(
        NAME,
        || {
            let truth = benchmark_scenario("overlapping")?.true_params;
            let data = sample_mixture(&truth, 300, Seed(1))?;
            let cfg = RunConfig {
                algorithm: Algorithm::Cemm,
                tol: 1e-13,
                max_cycles: 20_000,
                ..RunConfig::default()
            };
            let traj = run(&overlapping_start(), &data, &cfg)?;
            if let Some(err) = traj.stop_reason.failure() {
                return Err(err);
            }
            Ok(traj.final_params.constraint_residual().abs())
        },
        |residual| {
            CheckResult::from_margin(
                NAME,
                1e-6 - residual,
                format!("|Σp−1| = {residual:.3e} at tol 1e-13"),
            )
        },
    )
}

fn cost_parity() -> CheckResult {
    const NAME: &str = "cost_parity";
    named(
        NAME,
        || {
            let mut mismatches = 0usize;
            let mut cycles = 0usize;
            for seed in 0..5 {
                let inst = random_instance(seed, 50);
                let expected = (inst.start.n_components() * inst.data.len()) as u64;
                for algorithm in Algorithm::ALL {
                    let mut stepper = Stepper::new(inst.start.clone(), &inst.data, 1e-6)?;
                    for _ in 0..5 {
                        let before = stepper.density_evaluations();
                        stepper.cycle(algorithm)?;
                        cycles += 1;
                        if stepper.density_evaluations() - before != expected {
                            mismatches += 1;
                        }
                    }
                }
            }
            Ok((mismatches, cycles))
        },
        |(mismatches, cycles)| CheckResult {
            name: NAME,
            passed: mismatches == 0,
            margin: if mismatches == 0 {
                0.0
            } else {
                -(mismatches as f64)
            },
            detail: format!("{mismatches} of {cycles} cycles differ from J·n"),
        },
    )
}

fn guarded_empty_component() -> CheckResult {
    const NAME: &str = "guarded_empty_component";
    named(
        NAME,
        || {
            let data = Dataset::univariate(&[0.0; 20])?;
            let start = MixtureParams::univariate(&[0.5, 0.5], &[0.0, 100.0], &[1.0, 1.0])?;
            let cfg = RunConfig {
                variance_floor: Some(0.0),
                ..RunConfig::default()
            };
            run(&start, &data, &cfg)
        },
        |traj| {
            let surfaced = matches!(
                traj.stop_reason,
                StopReason::NumericalFailure {
                    error: MixtureError::EmptyComponent { .. },
                    ..
                }
            );
            CheckResult {
                name: NAME,
                passed: surfaced,
                margin: if surfaced { 0.0 } else { -1.0 },
                detail: format!("stop reason: {:?}", traj.stop_reason),
            }
        },
    )
}

fn extreme_row_stochasticity() -> CheckResult {
    const NAME: &str = "extreme_row_stochasticity";
    named(
        NAME,
        || {
            let theta = MixtureParams::univariate(&[0.5, 0.5], &[0.0, 1.0], &[1.0, 1.0])?;
            let data = Dataset::univariate(&[-40.0, 41.0, 0.5])?;
            let t = responsibilities(&theta, &data)?;
            let loglik = observed_log_likelihood(&theta, &data)?;
            let worst = (0..data.len())
                .map(|i| ((0..2).map(|j| t.get(i, j)).sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max);
            Ok((worst, loglik))
        },
        |(worst, loglik)| {
            let margin = if loglik.is_finite() {
                1e-12 - worst
            } else {
                -1.0
            };
            CheckResult::from_margin(NAME, margin, format!("max |Σ_j t_ij − 1| = {worst:.3e}"))
        },
    )
}
