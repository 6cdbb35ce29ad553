use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the decoding library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alist line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("code dimension {dim} exceeds the enumeration limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bit {bit} has degree {degree}; this operation needs degree >= 2")]
    DegenerateBitDegree { bit: usize, degree: usize },

    #[error("belief on {0} is not a normalized distribution")]
    InvalidBelief(String),

    #[error("magnetization saturated at bit {bit} (|m| = 1); amplitude is ill-defined")]
    Saturated { bit: usize },

    #[error("loop enumeration budget exceeded after {0} loops")]
    LoopBudgetExceeded(usize),

    #[error("loop is not single-connected: {0}")]
    NotSingleConnected(String),

    #[error("the origin is not feasible for this LP (row {row})")]
    InfeasibleStart { row: usize },

    #[error("LP is unbounded")]
    Unbounded,

    #[error("simplex stalled after {iterations} iterations")]
    Stalled { iterations: usize },

    #[error("pseudo-codeword is the zero vector")]
    ZeroPseudoCodeword,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
