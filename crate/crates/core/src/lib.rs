//! Maximum-likelihood estimation of Gaussian mixtures with three
//! interchangeable fitting algorithms:
//!
//! * **EM**: full E-step, then all blocks `(p_j, μ_j, Σ_j)` at once.
//! * **CEMM** (component-wise EM): one block per iteration, visited
//!   cyclically. Proportions may leave the simplex during the run; the
//!   modified log-likelihood `Λ = L − n(Σp − 1)` increases by at least the
//!   Kullback penalty `D` at every iteration.
//! * **SAGE**: one `(μ_j, Σ_j)` iteration per component, followed by a
//!   joint proportions iteration.
//!
//! A cycle updates every component once and costs `J·n` component-density
//! evaluations for each algorithm.

pub mod density;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod params;
pub mod simulation;

pub use density::{gaussian_log_density, log_sum_exp, Gaussian};
pub use error::{MixtureError, Result};
pub use estimators::{
    cemm_cycle, cemm_iteration, component_schedule, default_variance_floor, em_cycle, run,
    sage_cycle, Algorithm, CycleRecord, RunConfig, Stepper, StopReason, Trajectory,
};
pub use functionals::{
    diagnostics, kullback_penalty, mixture_log_density, modified_log_likelihood,
    observed_log_likelihood, q_function, responsibilities, DiagnosticsRecord, Responsibilities,
};
pub use params::{Dataset, MixtureParams};
pub use simulation::{
    benchmark_scenario, init_explicit, init_moment, overlapping_start, read_dataset,
    sample_mixture, write_dataset, Scenario, ScenarioName, Seed,
};
