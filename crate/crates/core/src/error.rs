use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid probability {value} for {what}")]
    InvalidProbability { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid outcomes model: {0}")]
    InvalidModel(String),

    #[error("degenerate model at node {node}: neighborhood weights sum to zero")]
    DegenerateModel { node: usize },

    #[error("node {node} has no self-loop, so its direct effect is undefined")]
    MissingSelfLoop { node: usize },

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("regression underdetermined: {rows} observations for {cols} coefficients")]
    Underdetermined { rows: usize, cols: usize },

    #[error("subset index size {size} exceeds the limit of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("exhaustive enumeration over {n} units exceeds the cap of {cap}")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_undefined_estimate(&self) -> bool {
        matches!(self, Error::UndefinedEstimate(_))
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}
