//! Set-associative cache replay and per-block reliability bookkeeping.

mod accounting;
mod bits;
mod geometry;
mod model;
mod policy;
mod record;

pub use accounting::{BlockAccounting, CacheAccounting, CacheTotals, PerBitCounters};
pub use bits::{bit, count_ones, transitions};
pub use geometry::{CacheGeometry, ReplacementKind, VulnerableValue};
pub use model::{
    AccessError, AccessOutcome, CacheModel, Eviction, FrameId, ModelOptions, ReadHistory,
};
pub use policy::{FifoPolicy, LruPolicy, ReplacementPolicy};
pub use record::{AccessKind, AccessRecord};

/// Nanoseconds per second.
pub const NS_PER_S: f64 = 1e9;

/// Converts integer nanoseconds to seconds.
#[inline]
pub fn ns_to_s(ns: u64) -> f64 {
    ns as f64 / NS_PER_S
}
