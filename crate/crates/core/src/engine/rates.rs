use serde::{Deserialize, Serialize};

use crate::cell::{
    p_write_fail_cell, read_disturb_log_survival, retention_rate, write_failure_pair, CellParams,
    ParamError, WriteFailurePair, WritePresets,
};
use crate::logspace::log_survival_from_prob;
use crate::pv::{CellId, PvModel};

/// Per-event rates of one cell, ready for exposure-weighted accumulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellRates {
    /// Retention hazard, per second.
    pub retention_rate: f64,
    /// `ln(1 - P_RD)` per read of a vulnerable cell.
    pub rd_log_survival: f64,
    /// `ln(1 - P_WF)` per switching write, by direction.
    pub wf_0to1_log_survival: f64,
    pub wf_1to0_log_survival: f64,
}

/// Nominal cell plus the write presets for each switching direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub nominal: CellParams,
    pub write: WritePresets,
}

impl DeviceParams {
    pub fn new(nominal: CellParams, write: WritePresets) -> Result<Self, ParamError> {
        let device = Self { nominal, write };
        device.nominal.validate()?;
        device.params_0to1().validate()?;
        device.params_1to0().validate()?;
        Ok(device)
    }

    /// Same parameters for both directions.
    pub fn symmetric(nominal: CellParams) -> Self {
        Self {
            nominal,
            write: WritePresets::default(),
        }
    }

    pub fn params_0to1(&self) -> CellParams {
        self.write.zero_to_one.apply(&self.nominal)
    }

    pub fn params_1to0(&self) -> CellParams {
        self.write.one_to_zero.apply(&self.nominal)
    }

    pub fn write_pair(&self) -> Result<WriteFailurePair, ParamError> {
        write_failure_pair(&self.params_0to1(), &self.params_1to0())
    }

    pub fn rates(&self) -> Result<CellRates, ParamError> {
        Self::rates_of(&self.nominal, &self.params_0to1(), &self.params_1to0())
    }

    /// Rates of one cell with its sampled deviations applied to each
    /// direction-specific parameter set.
    pub fn sampled_rates(&self, pv: &PvModel, id: CellId) -> Result<CellRates, ParamError> {
        if pv.is_degenerate() {
            return self.rates();
        }
        let f = pv.factors(id);
        Self::rates_of(
            &f.apply(&self.nominal),
            &f.apply(&self.params_0to1()),
            &f.apply(&self.params_1to0()),
        )
    }

    fn rates_of(
        read: &CellParams,
        w01: &CellParams,
        w10: &CellParams,
    ) -> Result<CellRates, ParamError> {
        Ok(CellRates {
            retention_rate: retention_rate(read)?,
            rd_log_survival: read_disturb_log_survival(read)?,
            // Taken through the probability so the per-cell path and the
            // pair-based scalar path agree to the bit.
            wf_0to1_log_survival: log_survival_from_prob(p_write_fail_cell(w01)?),
            wf_1to0_log_survival: log_survival_from_prob(p_write_fail_cell(w10)?),
        })
    }
}
