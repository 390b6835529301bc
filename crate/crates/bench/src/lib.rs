//! Benchmark harness for the `cemm` estimators: simulation, fitting,
//! EM/CEMM/SAGE comparisons and the invariant check suite behind the
//! `cemm-bench` binary.

pub mod checks;
pub mod commands;
pub mod config;
pub mod instances;
pub mod oracle;
pub mod report;

use cemm::MixtureError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Mixture(#[from] MixtureError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{failed} run(s) ended in a numerical failure; first: {first}")]
    RunsFailed { failed: usize, first: String },

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl HarnessError {
    /// 1 for numerical failures (and failed checks), 2 for usage,
    /// validation and I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Mixture(err) if is_numerical(err) => 1,
            HarnessError::RunsFailed { .. } | HarnessError::ChecksFailed { .. } => 1,
            _ => 2,
        }
    }
}

fn is_numerical(err: &MixtureError) -> bool {
    matches!(
        err,
        MixtureError::NumericalFailure { .. }
            | MixtureError::NumericalUnderflow { .. }
            | MixtureError::InfinitePenalty { .. }
            | MixtureError::EmptyComponent { .. }
    )
}
