use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical engine.
///
/// Each variant names the module that produced it so CLI output can attribute
/// a failure without a backtrace.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{module}: invalid argument: {msg}")]
    Argument { module: &'static str, msg: String },

    #[error("{module}: outside the evaluation domain: {msg}")]
    Domain { module: &'static str, msg: String },

    #[error("{module}: pole or zero too close to the evaluation point: {msg}")]
    Singular { module: &'static str, msg: String },

    #[error("{module}: did not converge: {msg}")]
    Convergence { module: &'static str, msg: String },

    #[error("{module}: numerically unstable: {msg}")]
    Instability { module: &'static str, msg: String },

    #[error("{module}: resource limit exceeded: {msg}")]
    Resource { module: &'static str, msg: String },

    #[error("coefficient table covers n <= {have}, but {need} terms are required")]
    TableTooShort { have: usize, need: usize },

    #[error("d = {0} is not a member of the twist family")]
    NotInFamily(i64),

    #[error("zero count for d = {d}: found {found}, expected {expected:.2} (+-1)")]
    CountMismatch { d: i64, found: usize, expected: f64 },

    #[error("normalization mismatch: {0}")]
    NormalizationMismatch(String),

    #[error("empty data: {0}")]
    Empty(String),

    #[error("parse error in {path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Argument {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn domain(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn singular(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Singular {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn convergence(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Convergence {
            module,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
