//! Bernoulli fault injection over a replayed trace.
//!
//! Every elementary event gets its own independent coin per trial:
//!
//! - retention: one coin per (cell, vulnerable interval), with the interval's
//!   own failure probability;
//! - read disturbance: one coin per vulnerable cell per read hit;
//! - write failure: one coin per switching cell per write or fill.
//!
//! A trial fails for a class when any of its coins comes up. Events with a
//! bit-identical probability are pooled, and the (event, trial) grid of a pool
//! is walked with geometric skips, so the cost scales with the number of
//! flips rather than with events × trials.

use std::collections::HashMap;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{
    bit, AccessKind, AccessRecord, CacheAccounting, CacheGeometry, CacheModel, ModelOptions,
    VulnerableValue, NS_PER_S,
};
use crate::engine::{CacheExponents, CellRates, DeviceParams};
use crate::logspace::{log_survival_from_prob, prob_from_log_survival};
use crate::pv::{mix_words, CellId, PvModel};
use crate::Result;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(String),
}

/// Per-class multipliers; unset classes use the common factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassScale {
    pub retention: Option<f64>,
    pub read_disturb: Option<f64>,
    pub write_failure: Option<f64>,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub trials: u64,
    pub seed: u64,
    /// Multiplier making rare per-cell events observable. Retention scales the
    /// hazard rate; read and write events scale the per-event probability,
    /// clamped to 1.
    #[serde(default = "default_scale")]
    pub scale_factor: f64,
    #[serde(default)]
    pub class_scale: ClassScale,
}

impl OracleConfig {
    pub fn new(trials: u64, seed: u64, scale_factor: f64) -> Self {
        Self {
            trials,
            seed,
            scale_factor,
            class_scale: ClassScale::default(),
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.trials == 0 {
            return Err(OracleError::InvalidConfig(
                "trials must be at least 1".into(),
            ));
        }
        let scales = [
            Some(self.scale_factor),
            self.class_scale.retention,
            self.class_scale.read_disturb,
            self.class_scale.write_failure,
        ];
        for s in scales.into_iter().flatten() {
            if !(s >= 1.0 && s.is_finite()) {
                return Err(OracleError::InvalidConfig(format!(
                    "scale factor {s} must be finite and at least 1"
                )));
            }
        }
        Ok(())
    }

    fn scales(&self) -> [f64; 3] {
        let c = &self.class_scale;
        [
            c.retention.unwrap_or(self.scale_factor),
            c.read_disturb.unwrap_or(self.scale_factor),
            c.write_failure.unwrap_or(self.scale_factor),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventClass {
    Rf,
    Rd,
    Wf,
    Total,
}

impl EventClass {
    pub const ALL: [EventClass; 4] = [Self::Rf, Self::Rd, Self::Wf, Self::Total];

    pub fn label(self) -> &'static str {
        match self {
            Self::Rf => "RF",
            Self::Rd => "RD",
            Self::Wf => "WF",
            Self::Total => "TOTAL",
        }
    }
}

/// Wilson score interval for `successes` out of `n` at `z` standard deviations.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Analytic versus empirical failure probability of one event class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassEstimate {
    pub class: EventClass,
    pub analytic: f64,
    pub failures: u64,
    pub trials: u64,
    pub estimate: f64,
    /// Wilson 95% interval.
    pub ci95: (f64, f64),
    /// Wilson interval at 4σ, used for the pass/fail decision.
    pub band: (f64, f64),
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub classes: Vec<ClassEstimate>,
    pub warnings: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.classes.iter().all(|c| c.pass)
    }

    pub fn class(&self, class: EventClass) -> Option<&ClassEstimate> {
        self.classes.iter().find(|c| c.class == class)
    }
}

/// Everything an analytic run consumes, so the oracle sees the same inputs.
#[derive(Clone, Copy)]
pub struct OracleInput<'a> {
    pub geometry: CacheGeometry,
    pub vulnerable: VulnerableValue,
    pub device: &'a DeviceParams,
    pub pv: Option<&'a PvModel>,
    pub records: &'a [AccessRecord],
    pub start_ns: u64,
    pub end_ns: u64,
}

/// Rates after applying the oracle's scale factors.
#[derive(Clone, Copy, Debug)]
struct ScaledRates {
    retention_rate: f64,
    p_rd: f64,
    p_wf_0to1: f64,
    p_wf_1to0: f64,
}

impl ScaledRates {
    fn new(r: &CellRates, [s_rf, s_rd, s_wf]: [f64; 3], clamped: &mut bool) -> Self {
        let mut scale = |ls: f64, s: f64| {
            let p = prob_from_log_survival(ls) * s;
            if p >= 1.0 && s > 1.0 {
                *clamped = true;
            }
            p.min(1.0)
        };
        Self {
            retention_rate: r.retention_rate * s_rf,
            p_rd: scale(r.rd_log_survival, s_rd),
            p_wf_0to1: scale(r.wf_0to1_log_survival, s_wf),
            p_wf_1to0: scale(r.wf_1to0_log_survival, s_wf),
        }
    }

    fn as_cell_rates(&self) -> CellRates {
        CellRates {
            retention_rate: self.retention_rate,
            rd_log_survival: log_survival_from_prob(self.p_rd),
            wf_0to1_log_survival: log_survival_from_prob(self.p_wf_0to1),
            wf_1to0_log_survival: log_survival_from_prob(self.p_wf_1to0),
        }
    }
}

/// Pools of events keyed by the bits of their probability.
#[derive(Default)]
struct EventPools {
    pools: [HashMap<u64, u64>; 3],
}

impl EventPools {
    fn add(&mut self, class: usize, p: f64, count: u64) {
        if count > 0 && p > 0.0 {
            *self.pools[class].entry(p.to_bits()).or_default() += count;
        }
    }

    fn sorted(&self, class: usize) -> Vec<(f64, u64)> {
        let mut v: Vec<_> = self.pools[class]
            .iter()
            .map(|(&bits, &n)| (f64::from_bits(bits), n))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

struct Replay {
    pools: EventPools,
    accounting: CacheAccounting,
    rates: HashMap<CellId, ScaledRates>,
    clamped: bool,
}

fn replay(input: &OracleInput, scales: [f64; 3]) -> Result<Replay> {
    let mut model = CacheModel::new(
        input.geometry,
        ModelOptions {
            vulnerable: input.vulnerable,
            track_per_bit: true,
            start_ns: input.start_ns,
        },
    )?;
    let nominal = input.device.rates()?;
    let mut clamped = false;
    let nominal_scaled = ScaledRates::new(&nominal, scales, &mut clamped);
    let mut rates: HashMap<CellId, ScaledRates> = HashMap::new();
    let mut cell_rates = |id: CellId, clamped: &mut bool| -> Result<ScaledRates> {
        match input.pv {
            None => Ok(nominal_scaled),
            Some(pv) => {
                if let Some(r) = rates.get(&id) {
                    return Ok(*r);
                }
                let r = ScaledRates::new(&input.device.sampled_rates(pv, id)?, scales, clamped);
                rates.insert(id, r);
                Ok(r)
            }
        }
    };
    let bits = input.geometry.block_bits();
    let want_one = input.vulnerable == VulnerableValue::One;
    let mut pools = EventPools::default();
    let zeros = vec![0u8; input.geometry.block_bytes];

    for rec in input.records {
        // read misses install data too, which books a write from all-zeros
        let before = match rec.kind {
            AccessKind::Read | AccessKind::Write | AccessKind::Fill => Some(
                model
                    .lookup(rec.address)
                    .map(|f| model.content(f).to_vec())
                    .unwrap_or_else(|| zeros.clone()),
            ),
            _ => None,
        };
        let out = model.apply_access(rec)?;
        let Some(frame) = out.frame else { continue };
        if let Some(read) = out.read {
            let content = model.content(frame).to_vec();
            let t = read.idle_ns as f64 / NS_PER_S;
            for i in 0..bits {
                let r = cell_rates(CellId::new(frame.set, frame.way, i), &mut clamped)?;
                if read.idle_ns > 0 {
                    pools.add(0, prob_from_log_survival(-t * r.retention_rate), 1);
                }
                if bit(&content, i) == want_one {
                    pools.add(1, r.p_rd, 1);
                }
            }
        }
        if let Some(old) = before {
            if out.trans_0to1 + out.trans_1to0 > 0 {
                let new = model.content(frame).to_vec();
                for i in 0..bits {
                    match (bit(&old, i), bit(&new, i)) {
                        (false, true) => {
                            let r = cell_rates(CellId::new(frame.set, frame.way, i), &mut clamped)?;
                            pools.add(2, r.p_wf_0to1, 1);
                        }
                        (true, false) => {
                            let r = cell_rates(CellId::new(frame.set, frame.way, i), &mut clamped)?;
                            pools.add(2, r.p_wf_1to0, 1);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    let accounting = model.finalize(input.end_ns)?;
    Ok(Replay {
        pools,
        accounting,
        rates,
        clamped,
    })
}

/// Marks the failing trials of one class.
fn inject(pools: &[(f64, u64)], trials: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut failed = vec![0u64; trials.div_ceil(64) as usize];
    let mut set = |t: u64| failed[(t / 64) as usize] |= 1 << (t % 64);
    for &(p, count) in pools {
        if p >= 1.0 {
            (0..trials).for_each(&mut set);
            continue;
        }
        let log_q = (-p).ln_1p();
        let span = count as u128 * trials as u128;
        let mut pos: u128 = 0;
        loop {
            // 1 - u lies in (0, 1], so the skip is finite and non-negative
            let u: f64 = rng.random();
            let skip = ((1.0 - u).ln() / log_q).floor();
            if skip >= span as f64 {
                break;
            }
            pos += skip as u128;
            if pos >= span {
                break;
            }
            set((pos % trials as u128) as u64);
            pos += 1;
        }
    }
    failed
}

fn count(bits: &[u64]) -> u64 {
    bits.iter().map(|w| w.count_ones() as u64).sum()
}

/// Runs the oracle for every event class.
pub fn estimate_all(input: &OracleInput, config: &OracleConfig) -> Result<OracleReport> {
    config.validate()?;
    let scales = config.scales();
    let rep = replay(input, scales)?;

    let mut clamped = rep.clamped;
    let exps = match input.pv {
        None => CacheExponents::from_totals(
            &ScaledRates::new(&input.device.rates()?, scales, &mut clamped).as_cell_rates(),
            &rep.accounting,
        ),
        // cells that only sat idle behind masked intervals were never sampled
        Some(pv) => CacheExponents::from_rate_field(&rep.accounting, |id| {
            let r = match rep.rates.get(&id) {
                Some(r) => *r,
                None => {
                    ScaledRates::new(&input.device.sampled_rates(pv, id)?, scales, &mut clamped)
                }
            };
            Ok(r.as_cell_rates())
        })?,
    };
    let analytic = [
        prob_from_log_survival(exps.rf_vulnerable),
        prob_from_log_survival(exps.rd),
        prob_from_log_survival(exps.wf()),
        prob_from_log_survival(exps.total(false)),
    ];

    let mut warnings = Vec::new();
    if clamped {
        let msg =
            "scale factor pushed some per-cell probabilities to 1; they were clamped".to_string();
        warn!("{msg}");
        warnings.push(msg);
    }

    let mut bitsets = Vec::with_capacity(4);
    let mut degenerate = Vec::with_capacity(4);
    for class in 0..3 {
        let pools = rep.pools.sorted(class);
        let mut rng = ChaCha8Rng::seed_from_u64(mix_words(&[config.seed, class as u64 + 1]));
        bitsets.push(inject(&pools, config.trials, &mut rng));
        degenerate.push(pools.is_empty() || pools.iter().any(|&(p, _)| p >= 1.0));
    }
    let total: Vec<u64> = (0..bitsets[0].len())
        .map(|i| bitsets[0][i] | bitsets[1][i] | bitsets[2][i])
        .collect();
    bitsets.push(total);
    degenerate.push(degenerate.iter().all(|&d| d) || analytic[3] >= 1.0);

    let n = config.trials;
    let classes = EventClass::ALL
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let failures = count(&bitsets[i]);
            let estimate = failures as f64 / n as f64;
            let (ci95, band) = if degenerate[i] {
                ((estimate, estimate), (estimate, estimate))
            } else {
                (
                    wilson_interval(failures, n, 1.96),
                    wilson_interval(failures, n, 4.0),
                )
            };
            let a = analytic[i];
            ClassEstimate {
                class,
                analytic: a,
                failures,
                trials: n,
                estimate,
                ci95,
                band,
                pass: band.0 <= a && a <= band.1 || (degenerate[i] && (a - estimate).abs() < 1e-12),
            }
        })
        .collect();
    Ok(OracleReport { classes, warnings })
}

/// Runs the oracle and returns the estimate of one event class.
pub fn estimate_cache_failure(
    input: &OracleInput,
    config: &OracleConfig,
    class: EventClass,
) -> Result<ClassEstimate> {
    let report = estimate_all(input, config)?;
    Ok(report
        .classes
        .into_iter()
        .find(|c| c.class == class)
        .expect("all classes are estimated"))
}
