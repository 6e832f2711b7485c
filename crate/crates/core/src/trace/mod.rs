//! Access traces: the text format, gzip handling and synthetic workloads.
//!
//! One record per line:
//!
//! ```text
//! <timestamp_ns> <R|W|F|E> <address_hex> [<data_hex>]
//! ```
//!
//! `W` (write) and `F` (fill from the next level) carry exactly one block of
//! data; `R` (read) and `E` (evict) carry none. Blank lines and text after
//! `#` are ignored. Timestamps must not decrease.

mod format;
mod synthetic;

pub use format::{open_trace, parse_trace, save_trace, write_record, write_trace, TraceReader};
pub use synthetic::{generate, SyntheticSpec, SyntheticTrace};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}, column {column}: {msg}")]
    MalformedLine {
        line: u64,
        column: usize,
        msg: String,
    },
    #[error("line {line}: timestamp {ts} ns precedes {prev_ts} ns on line {prev_line}")]
    TimeRegression {
        line: u64,
        ts: u64,
        prev_line: u64,
        prev_ts: u64,
    },
    #[error("line {line}: payload has {got} bytes, block size is {expected}")]
    BadDataLength {
        line: u64,
        expected: usize,
        got: usize,
    },
    #[error("invalid synthetic workload: {0}")]
    InvalidSpec(String),
}
