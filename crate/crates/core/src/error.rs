use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the optimization engine and its supporting modules.
///
/// Evaluator failures are not errors at this level: they are reported as
/// [`crate::problem::EvalFailure`] and turned into flagged records.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim}: value {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeight(String),

    #[error("utopia for the requested condition cell has not been observed yet")]
    UnvisitedCell,

    #[error("record from episode {0} is a failed evaluation")]
    FailedRecord(u64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric failure at episode {episode}: {detail}")]
    Numeric { episode: u64, detail: String },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("{path}:{line}: {detail}")]
    Parse {
        path: PathBuf,
        line: u64,
        detail: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// An error raised inside a named run (experiment repetition, hv_ref run).
    #[error("{run}: {source}")]
    InRun {
        run: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn in_run(run: impl Into<String>, source: Error) -> Self {
        Error::InRun {
            run: run.into(),
            source: Box::new(source),
        }
    }

    /// True for errors caused by invalid user input rather than a runtime fault.
    pub fn is_validation(&self) -> bool {
        if let Error::InRun { source, .. } = self {
            return source.is_validation();
        }
        matches!(
            self,
            Error::Config(_)
                | Error::OutOfBounds { .. }
                | Error::InvalidSpace(_)
                | Error::InvalidWeight(_)
                | Error::DimensionMismatch { .. }
        )
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
