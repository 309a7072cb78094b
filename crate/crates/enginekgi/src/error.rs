//! Error type shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by graph loading, file formats, scoring and training.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A text artifact (triples, concepts, rules, paths, embeddings) failed
    /// to parse. `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown {kind} token {token:?}")]
    UnknownToken { kind: &'static str, token: String },

    /// A contract violation in inputs or intermediate state (bad dimension,
    /// out-of-range score, empty grounding, ...).
    #[error("{0}")]
    Invalid(String),

    /// A rule whose body or head has no groundings; sc/hc are undefined.
    #[error("rule grounding undefined: {0}")]
    UndefinedScore(String),

    /// Training produced a non-finite loss.
    #[error("non-finite loss at epoch {epoch}: {detail}")]
    NonFinite { epoch: usize, detail: String },

    /// A loop phase failed; wraps the underlying error with where it
    /// happened.
    #[error("{phase} phase failed at iteration {iteration}: {source}")]
    Phase {
        phase: &'static str,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn phase(phase: &'static str, iteration: usize, source: Error) -> Self {
        Error::Phase {
            phase,
            iteration,
            source: Box::new(source),
        }
    }

    /// The error underneath any phase wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Phase { source, .. } => source.root(),
            other => other,
        }
    }
}
