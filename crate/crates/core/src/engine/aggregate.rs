use serde::Serialize;

use super::rates::{CellRates, DeviceParams};
use crate::cache::{BlockAccounting, CacheAccounting, PerBitCounters, NS_PER_S};
use crate::cell::pair_log_survival;
use crate::cell::{
    read_disturb_log_survival, retention_rate, CellParams, ParamError, WriteFailurePair,
};
use crate::logspace::{prob_from_log_survival, ExposureSum};
use crate::pv::{CellId, PvModel};
use crate::{Error, Result};

const NS: f64 = 1.0 / NS_PER_S;

/// Retention failure of an `n_bits` block over `t_vul` seconds of vulnerable
/// idle time (the sum of all its vulnerable intervals).
pub fn p_rf_block(params: &CellParams, n_bits: u64, t_vul: f64) -> Result<f64, ParamError> {
    if !(t_vul >= 0.0 && t_vul.is_finite()) {
        return Err(ParamError::Invalid {
            name: "t_vul",
            value: t_vul,
            reason: "must be non-negative and finite",
        });
    }
    let rate = retention_rate(params)?;
    Ok(prob_from_log_survival(-(n_bits as f64 * t_vul) * rate))
}

/// Retention failure of the whole cache from the blocks' vulnerable time.
pub fn p_rf_cache(
    params: &CellParams,
    n_bits: u64,
    blocks: &[BlockAccounting],
) -> Result<f64, ParamError> {
    let rate = retention_rate(params)?;
    let total: u128 = blocks.iter().map(|b| b.vulnerable_idle_ns as u128).sum();
    let mut sum = ExposureSum::new(NS);
    sum.push(-rate, n_bits as u128 * total);
    Ok(prob_from_log_survival(sum.finish()))
}

/// Read disturbance of one block over its reads; `ones_read` counts vulnerable
/// cells summed over reads.
pub fn p_rd_block(params: &CellParams, ones_read: u128) -> Result<f64, ParamError> {
    p_rd_cache(params, ones_read)
}

/// Read disturbance of the whole cache: `1 - (1 - P_RD)^total`.
pub fn p_rd_cache(params: &CellParams, total_ones_read: u128) -> Result<f64, ParamError> {
    let ls = read_disturb_log_survival(params)?;
    let mut sum = ExposureSum::new(1.0);
    sum.push(ls, total_ones_read);
    Ok(prob_from_log_survival(sum.finish()))
}

/// Write failure of the whole cache from the direction totals.
pub fn p_wf_cache(pair: &WriteFailurePair, total_0to1: u128, total_1to0: u128) -> f64 {
    let (ls01, ls10) = pair_log_survival(pair);
    prob_from_log_survival(wf_exponent(ls01, total_0to1, ls10, total_1to0))
}

fn wf_exponent(ls01: f64, t01: u128, ls10: f64, t10: u128) -> f64 {
    let mut up = ExposureSum::new(1.0);
    let mut down = ExposureSum::new(1.0);
    up.push(ls01, t01);
    down.push(ls10, t10);
    up.finish() + down.finish()
}

/// Visits every cell of every block in block-then-bit order.
fn for_each_cell<F>(acct: &CacheAccounting, mut f: F) -> Result<()>
where
    F: FnMut(CellId, &BlockAccounting, &PerBitCounters, usize) -> Result<()>,
{
    for block in &acct.blocks {
        let per_bit = block.per_bit.as_ref().ok_or(Error::MissingPerBitCounters)?;
        for i in 0..acct.block_bits {
            f(CellId::new(block.set, block.way, i), block, per_bit, i)?;
        }
    }
    Ok(())
}

/// Retention failure with a sampled thermal stability factor per cell.
pub fn p_rf_cache_pv(pv: &PvModel, nominal: &CellParams, acct: &CacheAccounting) -> Result<f64> {
    let mut sum = ExposureSum::new(NS);
    for_each_cell(acct, |id, _, pb, i| {
        let t = pb.vulnerable_ns[i];
        if t > 0 {
            let rate = retention_rate(&pv.sample_cell(nominal, id))?;
            sum.push(-rate, t as u128);
        }
        Ok(())
    })?;
    Ok(prob_from_log_survival(sum.finish()))
}

/// Read disturbance with per-cell parameters and per-cell read counts.
pub fn p_rd_cache_pv(pv: &PvModel, nominal: &CellParams, acct: &CacheAccounting) -> Result<f64> {
    let mut sum = ExposureSum::new(1.0);
    for_each_cell(acct, |id, _, pb, i| {
        let n = pb.ones_read[i];
        if n > 0 {
            let ls = read_disturb_log_survival(&pv.sample_cell(nominal, id))?;
            sum.push(ls, n as u128);
        }
        Ok(())
    })?;
    Ok(prob_from_log_survival(sum.finish()))
}

/// Write failure with per-cell parameters and per-cell direction counts.
pub fn p_wf_cache_pv(pv: &PvModel, device: &DeviceParams, acct: &CacheAccounting) -> Result<f64> {
    let mut up = ExposureSum::new(1.0);
    let mut down = ExposureSum::new(1.0);
    for_each_cell(acct, |id, _, pb, i| {
        let (t01, t10) = (pb.trans_0to1[i], pb.trans_1to0[i]);
        if t01 > 0 || t10 > 0 {
            let r = device.sampled_rates(pv, id)?;
            up.push(r.wf_0to1_log_survival, t01 as u128);
            down.push(r.wf_1to0_log_survival, t10 as u128);
        }
        Ok(())
    })?;
    Ok(prob_from_log_survival(up.finish() + down.finish()))
}

/// Accumulated log-survival exponents over the whole execution.
///
/// Retention is kept for both scenarios: intervals ended by reads only, and
/// every idle interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CacheExponents {
    pub rf_vulnerable: f64,
    pub rf_all: f64,
    pub rd: f64,
    pub wf_0to1: f64,
    pub wf_1to0: f64,
}

impl CacheExponents {
    /// Nominal path: scalar totals times nominal rates.
    pub fn nominal(device: &DeviceParams, acct: &CacheAccounting) -> Result<Self, ParamError> {
        Ok(Self::from_totals(&device.rates()?, acct))
    }

    /// Same as [`CacheExponents::nominal`] with precomputed rates.
    pub fn from_totals(rates: &CellRates, acct: &CacheAccounting) -> Self {
        let n = acct.block_bits as u128;
        let t = acct.totals();
        let mut rf_v = ExposureSum::new(NS);
        let mut rf_a = ExposureSum::new(NS);
        let mut rd = ExposureSum::new(1.0);
        let mut up = ExposureSum::new(1.0);
        let mut down = ExposureSum::new(1.0);
        rf_v.push(-rates.retention_rate, n * t.vulnerable_idle_ns);
        rf_a.push(-rates.retention_rate, n * t.all_idle_ns);
        rd.push(rates.rd_log_survival, t.ones_read);
        up.push(rates.wf_0to1_log_survival, t.trans_0to1);
        down.push(rates.wf_1to0_log_survival, t.trans_1to0);
        Self {
            rf_vulnerable: rf_v.finish(),
            rf_all: rf_a.finish(),
            rd: rd.finish(),
            wf_0to1: up.finish(),
            wf_1to0: down.finish(),
        }
    }

    /// Process-variation path: one sampled parameter set per cell.
    pub fn with_pv(device: &DeviceParams, pv: &PvModel, acct: &CacheAccounting) -> Result<Self> {
        Self::from_rate_field(acct, |id| Ok(device.sampled_rates(pv, id)?))
    }

    /// Per-cell path with arbitrary per-cell rates, visited in block-then-bit
    /// order. Cells that were never exposed are not asked for their rates.
    pub fn from_rate_field<F>(acct: &CacheAccounting, mut rates: F) -> Result<Self>
    where
        F: FnMut(CellId) -> Result<CellRates>,
    {
        let mut rf_v = ExposureSum::new(NS);
        let mut rf_a = ExposureSum::new(NS);
        let mut rd = ExposureSum::new(1.0);
        let mut up = ExposureSum::new(1.0);
        let mut down = ExposureSum::new(1.0);
        for_each_cell(acct, |id, block, pb, i| {
            let all = block.all_idle_ns;
            let (v, n, t01, t10) = (
                pb.vulnerable_ns[i],
                pb.ones_read[i],
                pb.trans_0to1[i],
                pb.trans_1to0[i],
            );
            if all == 0 && v == 0 && n == 0 && t01 == 0 && t10 == 0 {
                return Ok(());
            }
            let r = rates(id)?;
            rf_v.push(-r.retention_rate, v as u128);
            rf_a.push(-r.retention_rate, all as u128);
            rd.push(r.rd_log_survival, n as u128);
            up.push(r.wf_0to1_log_survival, t01 as u128);
            down.push(r.wf_1to0_log_survival, t10 as u128);
            Ok(())
        })?;
        Ok(Self {
            rf_vulnerable: rf_v.finish(),
            rf_all: rf_a.finish(),
            rd: rd.finish(),
            wf_0to1: up.finish(),
            wf_1to0: down.finish(),
        })
    }

    pub fn rf(&self, all_intervals: bool) -> f64 {
        if all_intervals {
            self.rf_all
        } else {
            self.rf_vulnerable
        }
    }

    /// Exponent of the combined failure of all three sources.
    pub fn total(&self, all_intervals: bool) -> f64 {
        self.rf(all_intervals) + self.rd + self.wf()
    }

    pub fn wf(&self) -> f64 {
        self.wf_0to1 + self.wf_1to0
    }

    pub fn p_rf(&self) -> f64 {
        prob_from_log_survival(self.rf_vulnerable)
    }

    pub fn p_rf_all(&self) -> f64 {
        prob_from_log_survival(self.rf_all)
    }

    pub fn p_rd(&self) -> f64 {
        prob_from_log_survival(self.rd)
    }

    pub fn p_wf(&self) -> f64 {
        prob_from_log_survival(self.wf())
    }
}
