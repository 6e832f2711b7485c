//! Aggregation of cache accounting into failure probabilities.
//!
//! All aggregates are carried as log-survival exponents (`Σ n·ln(1-p)` and
//! `-Σ t·rate`) and only turned into probabilities at the end. The nominal
//! path reads scalar totals; the process-variation path walks per-cell
//! counters with per-cell parameters.

mod aggregate;
mod rates;
mod report;

pub use aggregate::{
    p_rd_block, p_rd_cache, p_rd_cache_pv, p_rf_block, p_rf_cache, p_rf_cache_pv, p_wf_cache,
    p_wf_cache_pv, CacheExponents,
};
pub use rates::{CellRates, DeviceParams};
pub use report::{
    combine_independent, per_read_block_error, per_unit_time_report, Breakdown, PerReadError,
    ReliabilityReport, MICROSECOND,
};
