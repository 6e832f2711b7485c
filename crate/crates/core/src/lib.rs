//! Trace-driven reliability simulator for STT-MRAM last-level caches.
//!
//! The crate is organised bottom-up:
//!
//! - [`cell`]: per-cell retention, read-disturbance and write-failure probabilities.
//! - [`pv`]: deterministic per-cell process-variation sampling.
//! - [`cache`]: set-associative cache replay that harvests the counters the
//!   reliability formulas consume.
//! - [`engine`]: block-, cache- and per-unit-time aggregation, nominal and PV-affected.
//! - [`oracle`]: extended-precision brute-force products and Monte Carlo fault injection.
//! - [`trace`]: trace parsing/serialisation and synthetic workload generation.
//! - [`run`]: run configuration, report documents, sweeps and validation.

pub mod cache;
pub mod cell;
pub mod engine;
pub mod error;
pub mod logspace;
pub mod oracle;
pub mod pv;
pub mod run;
pub mod trace;

pub use error::{Error, Result};
