//! Run configurations, report documents, sweeps and validation.

mod config;
mod report;
mod sweep;
mod tables;
mod validate;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    set_numeric, CacheSection, PvSection, ReportUnit, RetentionScenario, RunConfig, RunSection,
    TraceSection,
};
pub use report::{
    config_hash, run, run_records, trace_records, BreakdownSection, CellSection, CounterSection,
    Metadata, PerReadRow, Quantity, ReportDocument, ResultSection, REPORT_SCHEMA, REPORT_VERSION,
};
pub use sweep::{sweep, SweepRow, SweepTable};
pub use tables::write_csv_tables;
pub use validate::{format_table, validate};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config field `{path}`: {reason}")]
    Invalid { path: String, reason: String },
}
