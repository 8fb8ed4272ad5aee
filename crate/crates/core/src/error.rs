use thiserror::Error;

/// Errors raised by the simulators, the exact oracle and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("process is not stuck: an allowed pair still exists")]
    NotStuck,

    #[error("all bins are saturated")]
    AllSaturated,

    #[error("state budget of {budget} exceeded while enumerating n={n}, d={d}")]
    BudgetExceeded { n: usize, d: usize, budget: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("I/O error at trial {trial:?}: {source}")]
    Io {
        trial: Option<u64>,
        #[source]
        source: std::io::Error,
    },

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io { trial: None, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
