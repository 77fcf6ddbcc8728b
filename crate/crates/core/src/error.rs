use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario or demographic setting is invalid. `field` is the dotted path of the offending key.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// Input data (survey, registry, aggregate file) is malformed or unusable.
    #[error("data error: {0}")]
    Data(String),

    #[error("unknown agent id {0}")]
    UnknownAgent(usize),

    /// Estimation could not proceed; names the covariate responsible where one can be identified.
    #[error("estimation failed for `{covariate}`: {message}")]
    Estimation { covariate: String, message: String },

    #[error("replication with seed {seed} failed: {message}")]
    Replication { seed: u64, message: String },

    #[error("{0}")]
    Runtime(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Error::Data(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Data(_) | Error::Estimation { .. } => 3,
            Error::UnknownAgent(_) | Error::Replication { .. } | Error::Runtime(_) | Error::Io { .. } => 4,
        }
    }
}
