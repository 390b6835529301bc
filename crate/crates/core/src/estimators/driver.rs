use super::engine::Stepper;
use super::{Algorithm, RunConfig, SIMPLEX_TOL};
use crate::error::{MixtureError, Result};
use crate::functionals::{kl_log_matrices, DiagnosticsRecord};
use crate::params::{Dataset, MixtureParams};

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    ToleranceReached,
    MaxCycles,
    /// The cycle with index `cycle` failed; the trajectory ends at the
    /// previous cycle.
    NumericalFailure {
        cycle: usize,
        error: MixtureError,
    },
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::ToleranceReached => "tolerance_reached",
            StopReason::MaxCycles => "max_cycles",
            StopReason::NumericalFailure { .. } => "numerical_failure",
        }
    }

    /// The failure wrapped with its cycle index, if any.
    pub fn failure(&self) -> Option<MixtureError> {
        match self {
            StopReason::NumericalFailure { cycle, error } => Some(MixtureError::NumericalFailure {
                cycle: *cycle,
                source: Box::new(error.clone()),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub diagnostics: DiagnosticsRecord,
    /// Component-density evaluations spent in this cycle (for cycle 0, the
    /// initial cache fill).
    pub density_evaluations: u64,
    pub params: Option<MixtureParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    /// One record per cycle, cycle 0 being the starting point.
    pub records: Vec<CycleRecord>,
    pub final_params: MixtureParams,
    pub cycles_run: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn last(&self) -> &CycleRecord {
        self.records
            .last()
            .expect("trajectory always holds cycle 0")
    }
}

struct Snapshot {
    log_t: nalgebra::DMatrix<f64>,
    diagnostics: DiagnosticsRecord,
}

fn snapshot(stepper: &Stepper<'_>, previous: Option<&nalgebra::DMatrix<f64>>) -> Result<Snapshot> {
    let log_t = stepper.log_responsibilities()?;
    let loglik = stepper.log_likelihood()?;
    let residual = stepper.params().constraint_residual();
    let kullback_penalty = match previous {
        Some(prev) => kl_log_matrices(prev, &log_t)?,
        None => 0.0,
    };
    Ok(Snapshot {
        log_t,
        diagnostics: DiagnosticsRecord {
            loglik,
            modified_loglik: loglik - stepper.data().len() as f64 * residual,
            kullback_penalty,
            constraint_residual: residual,
        },
    })
}

/// Runs the configured algorithm from `theta0` until the relative change of
/// `Λ` over a cycle drops to `cfg.tol` or `cfg.max_cycles` cycles are done.
///
/// Invalid inputs are returned as errors. A numerical failure during the
/// run ends the trajectory early with [`StopReason::NumericalFailure`].
pub fn run(theta0: &MixtureParams, data: &Dataset, cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if matches!(cfg.algorithm, Algorithm::Em | Algorithm::Sage) {
        theta0.check_simplex(SIMPLEX_TOL)?;
    }
    let mut stepper = Stepper::new(theta0.clone(), data, cfg.resolve_floor(data))?;
    let initial = snapshot(&stepper, None)?;
    let mut records = vec![CycleRecord {
        cycle: 0,
        diagnostics: initial.diagnostics,
        density_evaluations: stepper.density_evaluations(),
        params: cfg.record_params.then(|| theta0.clone()),
    }];
    let mut previous = initial;
    let mut last_good = theta0.clone();
    let mut stop_reason = StopReason::MaxCycles;
    let mut converged = false;

    for cycle in 1..=cfg.max_cycles {
        let evaluations_before = stepper.density_evaluations();
        let step = stepper
            .cycle(cfg.algorithm)
            .and_then(|()| snapshot(&stepper, Some(&previous.log_t)));
        let current = match step {
            Ok(current) => current,
            Err(error) => {
                stop_reason = StopReason::NumericalFailure { cycle, error };
                break;
            }
        };
        last_good = stepper.params().clone();
        records.push(CycleRecord {
            cycle,
            diagnostics: current.diagnostics,
            density_evaluations: stepper.density_evaluations() - evaluations_before,
            params: cfg.record_params.then(|| last_good.clone()),
        });
        let before = previous.diagnostics.modified_loglik;
        let after = current.diagnostics.modified_loglik;
        previous = current;
        if (after - before).abs() <= cfg.tol * (1.0 + before.abs()) {
            stop_reason = StopReason::ToleranceReached;
            converged = true;
            break;
        }
    }

    Ok(Trajectory {
        algorithm: cfg.algorithm,
        cycles_run: records.len() - 1,
        records,
        final_params: last_good,
        converged,
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::diagnostics;

    fn toy_data() -> Dataset {
        Dataset::univariate(&[-1.0, 0.0, 1.0, 4.0, 2.5, -0.5, 3.5, 0.2]).unwrap()
    }

    fn toy_theta() -> MixtureParams {
        MixtureParams::univariate(&[0.5, 0.5], &[0.0, 3.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn one_cycle_gives_two_records() {
        let cfg = RunConfig {
            max_cycles: 1,
            ..RunConfig::new(Algorithm::Cemm)
        };
        let traj = run(&toy_theta(), &toy_data(), &cfg).unwrap();
        assert_eq!(traj.records.len(), 2);
        assert_eq!(traj.cycles_run, 1);
        assert_eq!(traj.stop_reason, StopReason::MaxCycles);
        assert!(!traj.converged);
    }

    #[test]
    fn zero_cycles_rejected() {
        let cfg = RunConfig {
            max_cycles: 0,
            ..RunConfig::default()
        };
        assert!(matches!(
            run(&toy_theta(), &toy_data(), &cfg),
            Err(MixtureError::InvalidConfig(_))
        ));
    }

    #[test]
    fn single_component_em_converges_at_cycle_two() {
        let theta = MixtureParams::univariate(&[1.0], &[7.0], &[0.3]).unwrap();
        let traj = run(&theta, &toy_data(), &RunConfig::default()).unwrap();
        assert!(traj.converged);
        assert_eq!(traj.cycles_run, 2);
        assert_eq!(traj.stop_reason, StopReason::ToleranceReached);
    }

    #[test]
    fn records_match_direct_diagnostics() {
        for algorithm in Algorithm::ALL {
            let cfg = RunConfig {
                record_params: true,
                max_cycles: 15,
                ..RunConfig::new(algorithm)
            };
            let data = toy_data();
            let traj = run(&toy_theta(), &data, &cfg).unwrap();
            for pair in traj.records.windows(2) {
                let prev = pair[0].params.as_ref().unwrap();
                let next = pair[1].params.as_ref().unwrap();
                let direct = diagnostics(next, Some(prev), &data).unwrap();
                let got = pair[1].diagnostics;
                assert!((direct.loglik - got.loglik).abs() < 1e-12);
                assert!((direct.modified_loglik - got.modified_loglik).abs() < 1e-12);
                assert!((direct.kullback_penalty - got.kullback_penalty).abs() < 1e-12);
                assert_eq!(direct.constraint_residual, got.constraint_residual);
            }
            assert_eq!(traj.records[0].diagnostics.kullback_penalty, 0.0);
        }
    }

    #[test]
    fn failure_stops_with_last_good_parameters() {
        let data = Dataset::univariate(&[0.0; 5]).unwrap();
        let theta = MixtureParams::univariate(&[0.5, 0.5], &[0.0, 100.0], &[1.0, 1.0]).unwrap();
        let cfg = RunConfig {
            variance_floor: Some(0.0),
            ..RunConfig::default()
        };
        let traj = run(&theta, &data, &cfg).unwrap();
        assert_eq!(traj.cycles_run, 0);
        assert_eq!(traj.final_params, theta);
        match &traj.stop_reason {
            StopReason::NumericalFailure { cycle, error } => {
                assert_eq!(*cycle, 1);
                assert!(matches!(
                    error,
                    MixtureError::EmptyComponent { component: 1, .. }
                ));
            }
            other => panic!("unexpected stop reason {other:?}"),
        }
        assert!(matches!(
            traj.stop_reason.failure(),
            Some(MixtureError::NumericalFailure { cycle: 1, .. })
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = RunConfig {
            record_params: true,
            ..RunConfig::new(Algorithm::Cemm)
        };
        let a = run(&toy_theta(), &toy_data(), &cfg).unwrap();
        let b = run(&toy_theta(), &toy_data(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
