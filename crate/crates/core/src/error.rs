use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    #[error("invalid value for `{key}`: {reason}")]
    ParameterDomain { key: &'static str, reason: String },

    /// A numerical routine did not converge.
    #[error("numerical failure in {routine}: {detail}")]
    NumericalFailure { routine: &'static str, detail: String },

    /// The requested state space is larger than the configured cap.
    #[error("state space of {requested} states exceeds the cap of {cap}; use the kinetic Monte Carlo path instead")]
    Capacity { requested: u128, cap: u128 },

    /// Not enough data points (samples, trajectories, sizes) to do the job.
    #[error("insufficient data: need at least {needed}, got {got} ({what})")]
    InsufficientData { what: &'static str, needed: usize, got: usize },

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A fit window contains unusable values.
    #[error("fit window error: {0}")]
    Window(String),

    /// Two inputs that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A decoder could not produce a correction.
    #[error("decoding error: {0}")]
    Decoding(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(key: &'static str, reason: impl Into<String>) -> Self {
        Error::ParameterDomain { key, reason: reason.into() }
    }

    pub(crate) fn numerical(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::NumericalFailure { routine, detail: detail.into() }
    }

    /// Whether the error stems from invalid input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ParameterDomain { .. }
                | Error::Precondition(_)
                | Error::Window(_)
                | Error::GridMismatch(_)
                | Error::InsufficientData { .. }
                | Error::Capacity { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
