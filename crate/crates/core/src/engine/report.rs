use serde::Serialize;

use super::aggregate::CacheExponents;
use super::rates::CellRates;
use crate::cache::{ReadHistory, NS_PER_S};
use crate::logspace::{log_survival_from_prob, prob_from_log_survival, NeumaierSum};
use crate::{Error, Result};

/// Reporting unit of the per-unit-time figures, in seconds.
pub const MICROSECOND: f64 = 1e-6;

/// Share of each failure source in the per-unit-time total.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Breakdown {
    pub retention: f64,
    pub read_disturb: f64,
    pub write_failure: f64,
}

impl Breakdown {
    /// `F_i / ΣF` with `F_i = 1 - R_i`; all zero when nothing can fail.
    fn from_failures(rf: f64, rd: f64, wf: f64) -> Self {
        let total = rf + rd + wf;
        if total == 0.0 {
            return Self::default();
        }
        Self {
            retention: rf / total,
            read_disturb: rd / total,
            write_failure: wf / total,
        }
    }

    pub fn sum(&self) -> f64 {
        self.retention + self.read_disturb + self.write_failure
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReliabilityReport {
    /// Failure probabilities over the whole execution.
    pub p_rf_cache: f64,
    pub p_rf_cache_all_intervals: f64,
    pub p_rd_cache: f64,
    pub p_wf_cache: f64,
    /// Reliabilities per unit of time.
    pub r_rf_t: f64,
    pub r_rf_t_all_intervals: f64,
    pub r_rd_t: f64,
    pub r_wf_t: f64,
    /// `1 - R_RF·R_RD·R_WF`, vulnerable-interval retention.
    pub p_total_per_t: f64,
    /// Same with every idle interval counted for retention.
    pub p_total_per_t_all_intervals: f64,
    pub breakdown: Breakdown,
    pub breakdown_all_intervals: Breakdown,
    /// Execution time, seconds.
    pub t_exe: f64,
    /// Unit of time the `*_t` fields refer to, seconds.
    pub unit_time: f64,
}

impl ReliabilityReport {
    /// Relative mismatch between `1 - p_total_per_t` and the product of the
    /// three reliabilities, for both retention scenarios.
    pub fn identity_residual(&self) -> f64 {
        let check = |p_total: f64, r_rf: f64| {
            let lhs = 1.0 - p_total;
            let rhs = r_rf * self.r_rd_t * self.r_wf_t;
            if lhs == rhs {
                0.0
            } else {
                ((lhs - rhs) / rhs).abs()
            }
        };
        check(self.p_total_per_t, self.r_rf_t).max(check(
            self.p_total_per_t_all_intervals,
            self.r_rf_t_all_intervals,
        ))
    }
}

/// Per-unit-time reliabilities: each accumulated exponent is scaled by
/// `unit / t_exe` before exponentiation.
pub fn per_unit_time_report(
    exps: &CacheExponents,
    t_exe: f64,
    unit_time: f64,
) -> Result<ReliabilityReport> {
    if !(t_exe > 0.0 && t_exe.is_finite()) {
        return Err(Error::InvalidExecutionTime(t_exe));
    }
    let k = unit_time / t_exe;
    let scale = |l: f64| if l == 0.0 { 0.0 } else { l * k };
    let (rf, rf_all, rd, wf) = (
        scale(exps.rf_vulnerable),
        scale(exps.rf_all),
        scale(exps.rd),
        scale(exps.wf()),
    );
    let total = |rf: f64| {
        let mut s = NeumaierSum::new();
        s.add(rf);
        s.add(rd);
        s.add(wf);
        prob_from_log_survival(s.value())
    };
    let f = prob_from_log_survival;
    Ok(ReliabilityReport {
        p_rf_cache: exps.p_rf(),
        p_rf_cache_all_intervals: exps.p_rf_all(),
        p_rd_cache: exps.p_rd(),
        p_wf_cache: exps.p_wf(),
        r_rf_t: rf.exp(),
        r_rf_t_all_intervals: rf_all.exp(),
        r_rd_t: rd.exp(),
        r_wf_t: wf.exp(),
        p_total_per_t: total(rf),
        p_total_per_t_all_intervals: total(rf_all),
        breakdown: Breakdown::from_failures(f(rf), f(rd), f(wf)),
        breakdown_all_intervals: Breakdown::from_failures(f(rf_all), f(rd), f(wf)),
        t_exe,
        unit_time,
    })
}

/// `1 - Π(1 - p_i)` for independent events.
pub fn combine_independent(probs: &[f64]) -> f64 {
    let mut s = NeumaierSum::new();
    probs.iter().for_each(|&p| s.add(log_survival_from_prob(p)));
    prob_from_log_survival(s.value())
}

/// Error probability of the data returned by one read: retention during the
/// idle interval the read ends, failure of the block's most recent write,
/// and disturbance by the read itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerReadError {
    pub p_retention: f64,
    pub p_write: f64,
    pub p_read_disturb: f64,
    pub p_total: f64,
}

pub fn per_read_block_error(rates: &CellRates, block_bits: usize, h: &ReadHistory) -> PerReadError {
    let rf = -rates.retention_rate * (block_bits as f64 * h.idle_ns as f64 / NS_PER_S);
    let times = |ls: f64, n: u64| if n == 0 { 0.0 } else { ls * n as f64 };
    let wf = times(rates.wf_0to1_log_survival, h.last_write_0to1)
        + times(rates.wf_1to0_log_survival, h.last_write_1to0);
    let rd = times(rates.rd_log_survival, h.ones_read);
    PerReadError {
        p_retention: prob_from_log_survival(rf),
        p_write: prob_from_log_survival(wf),
        p_read_disturb: prob_from_log_survival(rd),
        p_total: prob_from_log_survival(rf + wf + rd),
    }
}
