use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A width that grows without bound in the requested limit (e.g. a CW pump).
    #[error("width diverges: {0}")]
    Divergent(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("too few events: need at least {needed}, got {got}")]
    TooFewEvents { needed: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
