use std::path::PathBuf;

use thiserror::Error;

use crate::genclient::GenError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record could not be parsed under the declared schema.
    #[error("line {line}: field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    /// A parsed record violates a domain invariant.
    #[error("record `{id}`: {message}")]
    InvalidRecord { id: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was asked to work on input for which its result is undefined.
    #[error("undefined for this input: {0}")]
    Undefined(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error(
        "optimizer did not converge after {iterations} iterations (gradient norm {grad_norm:.3e})"
    )]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("malformed artifact: {0}")]
    Format(String),

    #[error("not enough candidates for stratum {stratum}: short by {shortfall}")]
    Stratum { stratum: String, shortfall: usize },

    /// An earlier pipeline stage has not produced its output yet.
    #[error("missing {path}; run `fakescope {producer}` first")]
    MissingArtifact {
        path: PathBuf,
        producer: &'static str,
    },

    #[error(transparent)]
    Generation(#[from] GenError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
