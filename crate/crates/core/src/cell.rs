//! Per-cell STT-MRAM error probabilities.
//!
//! Three stochastic switching mechanisms are modelled for a single cell:
//!
//! - retention failure of an idle cell: `1 - exp(-t · exp(-Δ))`
//! - read disturbance during one read pulse:
//!   `1 - exp(-(t_read/τ) · exp(Δ · (I_read - I_C0) / I_C0))`
//! - write failure of one switching attempt:
//!   `exp(-t_write · 2·μ_β·p·(I_write - I_C0) / D)`
//!
//! where the write-failure denominator `D` depends on [`WriteFailureForm`].
//!
//! All functions are pure; failure probabilities are produced from exact
//! log-survival values so that `1e-20`-class probabilities keep their full
//! relative precision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logspace::{log_survival_from_prob, prob_from_log_survival};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Default attempt period, seconds.
pub const DEFAULT_TAU: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> ParamError {
    ParamError::Invalid {
        name,
        value,
        reason,
    }
}

/// How the write-failure denominator is grouped.
///
/// `Typeset` reads the denominator as `c + ln(π²Δ/4) · (e·m·(1+p²))`.
/// `Grouped` reads it as `(c + ln(π²Δ/4)) · (e·m·(1+p²))`, the usual
/// thermally-activated precessional switching form. With SI constants the
/// typeset reading keeps the denominator near `c`, which drives the write
/// failure probability to one for every realistic current, so presets that
/// use physical units select `Grouped`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WriteFailureForm {
    #[default]
    Typeset,
    Grouped,
}

fn default_mu_beta() -> f64 {
    BOHR_MAGNETON
}
fn default_euler_c() -> f64 {
    EULER_GAMMA
}
fn default_e_charge() -> f64 {
    ELECTRON_CHARGE
}
fn default_boltzmann() -> f64 {
    BOLTZMANN
}
fn default_scale() -> f64 {
    1.0
}

/// Physical and circuit parameters of one STT-MRAM cell.
///
/// Currents are in amperes, durations in seconds, temperature in kelvin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellParams {
    /// Thermal stability factor Δ.
    pub delta: f64,
    /// Barrier energy in joules; when set together with `temperature`,
    /// `delta == e_b / (boltzmann · temperature)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub i_c0: f64,
    pub i_read: f64,
    pub i_write: f64,
    pub t_read: f64,
    pub t_write: f64,
    pub tau: f64,
    /// Magnetic moment of the free layer.
    pub m: f64,
    /// Tunnelling spin polarisation, in (0, 1).
    pub p_pol: f64,
    #[serde(default = "default_mu_beta")]
    pub mu_beta: f64,
    #[serde(default = "default_euler_c")]
    pub euler_c: f64,
    #[serde(default = "default_e_charge")]
    pub e_charge: f64,
    #[serde(default = "default_boltzmann")]
    pub boltzmann: f64,
    /// Multiplier on the retention rate `exp(-Δ)`; set to `1/τ₀` to restore an
    /// attempt-frequency prefactor.
    #[serde(default = "default_scale")]
    pub retention_rate_scale: f64,
    #[serde(default)]
    pub write_failure_form: WriteFailureForm,
}

impl CellParams {
    /// Parameters with `Δ = e_b / (K·T)`.
    pub fn with_barrier(mut self, e_b: f64, temperature: f64) -> Result<Self, ParamError> {
        if !(e_b > 0.0 && e_b.is_finite()) {
            return Err(invalid("e_b", e_b, "must be positive"));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(invalid("temperature", temperature, "must be positive"));
        }
        self.delta = e_b / (self.boltzmann * temperature);
        self.e_b = Some(e_b);
        self.temperature = Some(temperature);
        Ok(self)
    }

    /// Thermal stability factor derived from the barrier energy, if both inputs are set.
    pub fn delta_from_barrier(&self) -> Option<f64> {
        match (self.e_b, self.temperature) {
            (Some(e_b), Some(t)) => Some(e_b / (self.boltzmann * t)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, v, "must be positive and finite"))
            }
        };
        let non_negative = |name, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, v, "must be non-negative and finite"))
            }
        };
        positive("delta", self.delta)?;
        positive("tau", self.tau)?;
        positive("i_c0", self.i_c0)?;
        non_negative("i_read", self.i_read)?;
        non_negative("i_write", self.i_write)?;
        non_negative("t_read", self.t_read)?;
        non_negative("t_write", self.t_write)?;
        positive("m", self.m)?;
        positive("mu_beta", self.mu_beta)?;
        positive("e_charge", self.e_charge)?;
        positive("boltzmann", self.boltzmann)?;
        positive("retention_rate_scale", self.retention_rate_scale)?;
        if !self.euler_c.is_finite() {
            return Err(invalid("euler_c", self.euler_c, "must be finite"));
        }
        if !(self.p_pol > 0.0 && self.p_pol < 1.0) {
            return Err(invalid("p_pol", self.p_pol, "must lie in (0, 1)"));
        }
        if let Some(expected) = self.delta_from_barrier() {
            if ((self.delta - expected) / expected).abs() > 1e-12 {
                return Err(invalid(
                    "delta",
                    self.delta,
                    "inconsistent with e_b / (boltzmann * temperature)",
                ));
            }
        }
        Ok(())
    }
}

/// Optional per-direction replacements for write-path parameters.
///
/// Write failure is asymmetric between 0→1 and 1→0 switching; the asymmetry
/// is expressed as two effective parameter sets derived from the nominal cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_write: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_write: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_pol: Option<f64>,
}

impl CellOverrides {
    pub fn apply(&self, base: &CellParams) -> CellParams {
        let mut out = base.clone();
        if let Some(v) = self.i_write {
            out.i_write = v;
        }
        if let Some(v) = self.t_write {
            out.t_write = v;
        }
        if let Some(v) = self.i_c0 {
            out.i_c0 = v;
        }
        if let Some(v) = self.m {
            out.m = v;
        }
        if let Some(v) = self.p_pol {
            out.p_pol = v;
        }
        out
    }
}

/// Direction-specific overrides of the write parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WritePresets {
    #[serde(default)]
    pub zero_to_one: CellOverrides,
    #[serde(default)]
    pub one_to_zero: CellOverrides,
}

/// Write-failure probabilities for both switching directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WriteFailurePair {
    pub p_wf_0to1: f64,
    pub p_wf_1to0: f64,
}

/// Ratio the nominal 0→1 write-failure probability is expected to exceed the
/// 1→0 one by.
pub const WRITE_ASYMMETRY_RATIO: f64 = 100.0;

impl WriteFailurePair {
    pub fn new(p_wf_0to1: f64, p_wf_1to0: f64) -> Result<Self, ParamError> {
        for (name, p) in [("p_wf_0to1", p_wf_0to1), ("p_wf_1to0", p_wf_1to0)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(name, p, "must lie in [0, 1]"));
            }
        }
        Ok(Self {
            p_wf_0to1,
            p_wf_1to0,
        })
    }

    /// Configuration lint: a warning when 0→1 failures are not at least
    /// [`WRITE_ASYMMETRY_RATIO`] times more likely than 1→0 failures.
    pub fn asymmetry_lint(&self) -> Option<String> {
        if self.p_wf_0to1 >= WRITE_ASYMMETRY_RATIO * self.p_wf_1to0 && self.p_wf_0to1 > 0.0 {
            None
        } else {
            Some(format!(
                "write-failure asymmetry below {}x: p_wf_0to1 = {:e}, p_wf_1to0 = {:e}",
                WRITE_ASYMMETRY_RATIO, self.p_wf_0to1, self.p_wf_1to0
            ))
        }
    }
}

/// Retention hazard rate of one cell, per second: `scale · exp(-Δ)`.
pub fn retention_rate(params: &CellParams) -> Result<f64, ParamError> {
    if !(params.delta >= 0.0 && params.delta.is_finite()) {
        return Err(invalid(
            "delta",
            params.delta,
            "must be non-negative and finite",
        ));
    }
    if !(params.retention_rate_scale > 0.0 && params.retention_rate_scale.is_finite()) {
        return Err(invalid(
            "retention_rate_scale",
            params.retention_rate_scale,
            "must be positive and finite",
        ));
    }
    Ok(params.retention_rate_scale * (-params.delta).exp())
}

/// Retention-failure probability of one cell idle for `t_idle` seconds.
pub fn p_retention_cell(params: &CellParams, t_idle: f64) -> Result<f64, ParamError> {
    if !(t_idle >= 0.0 && t_idle.is_finite()) {
        return Err(invalid("t_idle", t_idle, "must be non-negative and finite"));
    }
    let rate = retention_rate(params)?;
    Ok(prob_from_log_survival(-t_idle * rate))
}

/// `ln(1 - P_RD)` for one read pulse on a vulnerable cell.
pub fn read_disturb_log_survival(params: &CellParams) -> Result<f64, ParamError> {
    if !(params.tau > 0.0 && params.tau.is_finite()) {
        return Err(invalid("tau", params.tau, "must be positive"));
    }
    if !(params.i_c0 > 0.0 && params.i_c0.is_finite()) {
        return Err(invalid("i_c0", params.i_c0, "must be positive"));
    }
    if !(params.t_read >= 0.0 && params.t_read.is_finite()) {
        return Err(invalid("t_read", params.t_read, "must be non-negative"));
    }
    let overdrive = params.delta * (params.i_read - params.i_c0) / params.i_c0;
    Ok(-(params.t_read / params.tau) * overdrive.exp())
}

/// Read-disturbance probability of one vulnerable cell during one read.
///
/// Only cells holding the value opposite to the read-current direction are
/// vulnerable; callers decide which cells that is.
pub fn p_read_disturb_cell(params: &CellParams) -> Result<f64, ParamError> {
    read_disturb_log_survival(params).map(prob_from_log_survival)
}

/// Switching rate term `t_write · 2·μ_β·p·(I_write - I_C0) / D`.
///
/// The write-failure probability is `exp(-exponent)`.
pub fn write_fail_exponent(params: &CellParams) -> Result<f64, ParamError> {
    let p = params.p_pol;
    let log_term = (PI * PI * params.delta / 4.0).ln();
    let moment = params.e_charge * params.m * (1.0 + p * p);
    let denominator = match params.write_failure_form {
        WriteFailureForm::Typeset => params.euler_c + log_term * moment,
        WriteFailureForm::Grouped => (params.euler_c + log_term) * moment,
    };
    if !(denominator > 0.0 && denominator.is_finite()) {
        return Err(invalid(
            "write_failure_denominator",
            denominator,
            "must be positive and finite",
        ));
    }
    if !(params.t_write >= 0.0 && params.t_write.is_finite()) {
        return Err(invalid("t_write", params.t_write, "must be non-negative"));
    }
    let numerator = 2.0 * params.mu_beta * p * (params.i_write - params.i_c0);
    Ok(params.t_write * numerator / denominator)
}

/// Write-failure probability of one cell that must switch.
pub fn p_write_fail_cell(params: &CellParams) -> Result<f64, ParamError> {
    let exponent = write_fail_exponent(params)?;
    Ok((-exponent).exp().clamp(0.0, 1.0))
}

/// `ln(1 - P_WF)` for one switching attempt.
pub fn write_fail_log_survival(params: &CellParams) -> Result<f64, ParamError> {
    let exponent = write_fail_exponent(params)?;
    if exponent <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    // 1 - exp(-x) = -expm1(-x); take its log directly.
    Ok((-(-exponent).exp_m1()).ln())
}

/// Evaluates write failure for each switching direction.
pub fn write_failure_pair(
    params_0to1: &CellParams,
    params_1to0: &CellParams,
) -> Result<WriteFailurePair, ParamError> {
    WriteFailurePair::new(
        p_write_fail_cell(params_0to1)?,
        p_write_fail_cell(params_1to0)?,
    )
}

/// Convenience for callers that already hold a pair: `ln(1 - p)` per direction.
pub fn pair_log_survival(pair: &WriteFailurePair) -> (f64, f64) {
    (
        log_survival_from_prob(pair.p_wf_0to1),
        log_survival_from_prob(pair.p_wf_1to0),
    )
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Physically-scaled cell used throughout the tests (grouped write form).
    pub fn physical() -> CellParams {
        CellParams {
            delta: 60.0,
            e_b: None,
            temperature: None,
            i_c0: 60e-6,
            i_read: 39e-6,
            i_write: 120e-6,
            t_read: 1e-9,
            t_write: 10e-9,
            tau: 1e-9,
            m: 3.5e-19,
            p_pol: 0.6,
            mu_beta: BOHR_MAGNETON,
            euler_c: EULER_GAMMA,
            e_charge: ELECTRON_CHARGE,
            boltzmann: BOLTZMANN,
            retention_rate_scale: 1.0,
            write_failure_form: WriteFailureForm::Grouped,
        }
    }
}
