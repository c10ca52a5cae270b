use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series too short: need at least {required} samples, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(String),

    #[error("bin {bin} maps to non-integer frequency {frequency} (misaligned sampling window)")]
    NonIntegerFrequency { bin: usize, frequency: f64 },

    #[error("empty input")]
    Empty,

    #[error("missing successive L value {0}")]
    MissingL(usize),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by numerics or parameter domains rather than
    /// usage or I/O problems.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::SeriesTooShort { .. }
                | Error::LengthMismatch { .. }
                | Error::Domain(_)
                | Error::DegenerateRegressor(_)
                | Error::NonIntegerFrequency { .. }
                | Error::Empty
                | Error::MissingL(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
