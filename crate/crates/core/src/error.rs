use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("invalid lambda: {0}")]
    Lambda(String),

    #[error("size {size} exceeds the enumeration ceiling {ceiling}")]
    SizeLimit { size: usize, ceiling: usize },

    #[error("infeasible allocation: {constraint} violated ({detail})")]
    InfeasibleAllocation { constraint: String, detail: String },

    #[error("instance is infeasible")]
    Infeasible,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("preprocessing for h = {h} failed: {msg}")]
    Preprocess { h: usize, msg: String },

    #[error("solver error: {msg}")]
    Solver { msg: String, log: Option<PathBuf> },

    #[error("variable `{name}` = {value} is not integral")]
    Integrality { name: String, value: f64 },

    #[error("objective mismatch: solver reported {reported}, recomputed {recomputed}")]
    ObjectiveMismatch { reported: f64, recomputed: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
