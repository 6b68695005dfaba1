use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// The data itself violates an invariant (non-binary label, unknown label name, ...).
    #[error("invalid data: {0}")]
    Data(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The optimizer produced a non-finite value; usually the step size is too large.
    #[error("non-finite objective at iteration {iteration}")]
    Diverged { iteration: usize },

    /// Friedman denominator vanished because every dataset ranks the algorithms identically.
    #[error("perfect separation: algorithm ranks are identical on every dataset")]
    PerfectSeparation,

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line tool: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Io { .. } | Error::Parse { .. } | Error::Data(_) | Error::Csv(_) => 2,
            Error::Shape(_) => 2,
            Error::Diverged { .. } | Error::PerfectSeparation => 3,
        }
    }
}
