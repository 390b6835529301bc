//! EM, component-wise EM (CEMM) and SAGE iteration engines, plus the
//! run driver that records per-cycle trajectories.

mod driver;
mod engine;

use std::fmt;
use std::str::FromStr;

use crate::error::{MixtureError, Result};
use crate::params::Dataset;

pub use driver::{run, CycleRecord, StopReason, Trajectory};
pub use engine::{cemm_cycle, cemm_iteration, em_cycle, sage_cycle, Stepper};

/// Relative factor of the data-driven default variance floor.
pub const DEFAULT_FLOOR_FACTOR: f64 = 1e-6;

/// Total responsibility below which a component is considered collapsed.
pub const EMPTY_COMPONENT_WEIGHT: f64 = 1e-300;

/// Tolerance on `|Σp − 1|` required at entry of EM and SAGE cycles.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Em,
    Cemm,
    Sage,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Em, Algorithm::Cemm, Algorithm::Sage];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Em => "EM",
            Algorithm::Cemm => "CEMM",
            Algorithm::Sage => "SAGE",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = MixtureError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Ok(Algorithm::Em),
            "cemm" => Ok(Algorithm::Cemm),
            "sage" => Ok(Algorithm::Sage),
            other => Err(MixtureError::InvalidConfig(format!(
                "unknown algorithm `{other}` (expected em, cemm or sage)"
            ))),
        }
    }
}

/// Settings for [`run`] and the single-cycle operations.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Stop once `|Λ_k − Λ_{k−1}| ≤ tol·(1 + |Λ_{k−1}|)`.
    pub tol: f64,
    pub max_cycles: usize,
    /// Absolute smallest-eigenvalue floor for covariance updates. `None`
    /// selects `1e-6 · trace(S)/d` from the sample covariance `S`.
    pub variance_floor: Option<f64>,
    /// Keep a parameter snapshot in every cycle record.
    pub record_params: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Em,
            tol: 1e-8,
            max_cycles: 1000,
            variance_floor: None,
            record_params: false,
        }
    }
}

impl RunConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(MixtureError::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_cycles == 0 {
            return Err(MixtureError::InvalidConfig(
                "max_cycles must be >= 1".into(),
            ));
        }
        if let Some(floor) = self.variance_floor {
            if !(floor.is_finite() && floor >= 0.0) {
                return Err(MixtureError::InvalidConfig(format!(
                    "variance_floor must be nonnegative, got {floor}"
                )));
            }
        }
        Ok(())
    }

    /// The absolute variance floor in effect for `data`.
    pub fn resolve_floor(&self, data: &Dataset) -> f64 {
        match self.variance_floor {
            Some(floor) => floor,
            None => default_variance_floor(data),
        }
    }
}

/// `1e-6 · trace(S)/d` for the maximum-likelihood sample covariance `S`.
pub fn default_variance_floor(data: &Dataset) -> f64 {
    DEFAULT_FLOOR_FACTOR * data.covariance().trace() / data.dim() as f64
}

/// Component updated at iteration `k` (zero-based), cycling `0, 1, …, J−1, 0, …`.
pub fn component_schedule(k: u64, n_components: usize) -> usize {
    assert!(n_components >= 1, "component count must be >= 1");
    (k % n_components as u64) as usize
}
