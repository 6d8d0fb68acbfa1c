use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file. `line`/`column` are 1-based, 0 when unknown.
    #[error("{context}: parse error at line {line}, column {column}: {message}")]
    Parse {
        context: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// A structural invariant does not hold; `field` is a path such as
    /// `documents[0].requirements[2].text`.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },

    /// Referential-integrity failure inside a file.
    #[error("{field} references unknown {kind} `{id}`")]
    Dangling {
        field: String,
        kind: &'static str,
        id: String,
    },

    #[error("dimension mismatch for `{id}`: expected {expected}, found {found}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    /// An error scoped to one (requirement, provision) pair.
    #[error("scoring ({req_id}, {code}): {source}")]
    Pair {
        req_id: String,
        code: String,
        #[source]
        source: Box<Error>,
    },

    #[error("zero-norm vector `{id}`")]
    ZeroNorm { id: String },

    #[error("non-finite value in vector `{id}`")]
    NonFinite { id: String },

    #[error("{0}")]
    Undefined(String),

    #[error("singular value decomposition did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("request to {url} failed after {attempts} attempt(s): {message}")]
    Network {
        url: String,
        attempts: usize,
        message: String,
    },

    #[error("authentication rejected by {url} (status {status})")]
    Auth { url: String, status: u16 },

    #[error("unexpected response shape: {0}")]
    ResponseShape(String),

    #[error("missing environment variable {0}")]
    MissingEnv(&'static str),

    #[error("cannot parse model output: {message}")]
    Output { message: String, raw: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn json(context: impl Into<String>, err: serde_json::Error) -> Self {
        Error::Parse {
            context: context.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
