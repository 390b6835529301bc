use thiserror::Error;

pub type Result<T> = std::result::Result<T, MixtureError>;

/// Errors raised while building, evaluating or fitting a mixture.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixtureError {
    #[error("covariance of component {component} is not positive definite: {reason}")]
    DegenerateCovariance { component: usize, reason: String },

    #[error("all component densities vanished for observation {observation}")]
    NumericalUnderflow { observation: usize },

    #[error("Kullback penalty is infinite: t[{observation}][{component}] vanished under the new parameters")]
    InfinitePenalty {
        observation: usize,
        component: usize,
    },

    #[error("component {component} collapsed: total responsibility {weight:e}")]
    EmptyComponent { component: usize, weight: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("proportions sum to {sum} (expected 1 within {tolerance:e})")]
    InvalidProportions { sum: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown scenario `{0}` (expected well_separated or overlapping)")]
    UnknownScenario(String),

    #[error("initializer supports univariate data only, got dimension {0}")]
    DimensionUnsupported(usize),

    #[error("cycle {cycle}: {source}")]
    NumericalFailure {
        cycle: usize,
        #[source]
        source: Box<MixtureError>,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MixtureError {
    fn from(err: std::io::Error) -> Self {
        MixtureError::Io(err.to_string())
    }
}
