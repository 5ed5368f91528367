use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not a positive multiple of five")]
    Dimension(usize),

    #[error("unknown {what} '{got}' (valid: {valid})")]
    UnknownId { what: &'static str, got: String, valid: String },

    #[error("infeasible genome at coordinate {index}: {value} is not admissible for {domain}")]
    Infeasible { index: usize, value: f64, domain: String },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("population of size {size} is too small (need at least {need})")]
    PopulationTooSmall { size: usize, need: usize },

    #[error("cannot draw {count} distinct indices from a pool of {available}")]
    Sampling { count: usize, available: usize },

    #[error("{0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evaluation budget exhausted")]
    BudgetExhausted,

    #[error("malformed file {path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
