use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("kernel {kernel}: Gram matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { kernel: String, min_eigenvalue: f64 },

    #[error("{what} did not converge (last residual {residual:e})")]
    NotConverged { what: String, residual: f64 },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("replicate {replicate} (seed {seed}): {source}")]
    Replicate {
        replicate: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status: 2 config, 3 data, 4 non-convergence,
    /// 5 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::Data(_) | Error::Parse { .. } | Error::NotPsd { .. } | Error::Io { .. } => 3,
            Error::NotConverged { .. } => 4,
            Error::Verification(_) => 5,
            Error::Replicate { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
