use thiserror::Error;

use crate::cache::AccessError;
use crate::cell::ParamError;
use crate::oracle::OracleError;
use crate::run::ConfigError;
use crate::trace::TraceError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error for the full pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Access(#[from] AccessError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid execution time {0} s (must be positive and finite)")]
    InvalidExecutionTime(f64),
    #[error(
        "process-variation path needs per-cell counters; replay with per-bit tracking enabled"
    )]
    MissingPerBitCounters,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
