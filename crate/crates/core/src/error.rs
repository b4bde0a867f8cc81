use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration or schema mismatch.
    #[error("configuration error: {0}")]
    Config(String),

    /// Surrogate fitting failed.
    #[error("fit failed after {iterations} iterations (objective {objective}): {reason}")]
    Fit {
        reason: String,
        iterations: usize,
        objective: f64,
    },

    /// `P(y = 1)` is 0 or 1 to machine precision, so one look-ahead branch is impossible.
    #[error("degenerate outcome probability p1 = {p1}")]
    DegenerateLikelihood { p1: f64 },

    /// A look-ahead posterior fell outside [0, 1] beyond tolerance.
    #[error("look-ahead posterior {value} outside [0, 1] beyond tolerance")]
    PosteriorOutOfRange { value: f64 },

    /// Acquisition maximization produced no finite candidate.
    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
