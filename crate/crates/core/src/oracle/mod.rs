//! Independent reference evaluations of the engine's aggregates.

pub mod dd;
pub mod montecarlo;

pub use dd::{brute_force_powers, brute_force_product, DoubleDouble};
pub use montecarlo::{
    estimate_all, estimate_cache_failure, wilson_interval, ClassEstimate, ClassScale, EventClass,
    OracleConfig, OracleError, OracleInput, OracleReport,
};
