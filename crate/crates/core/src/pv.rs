//! Process-variation sampling.
//!
//! Each affected parameter of each physical cell is multiplied by a factor
//! drawn from a truncated Gaussian `N(1, σ²)`. Draws are computed lazily: the
//! key `(seed, set, way, bit, parameter)` is mixed with the splitmix64
//! finaliser into a 64-bit seed for a ChaCha8 stream, and standard-normal
//! draws are taken from that stream until one falls inside the truncation
//! bound. The map from key to factor is therefore a pure function, independent
//! of query order and of which other parameters are enabled.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cell::{CellParams, ParamError};

/// Parameters that vary from cell to cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PvParam {
    Delta,
    IC0,
    IRead,
    IWrite,
    M,
    PPol,
}

impl PvParam {
    pub const ALL: [PvParam; 6] = [
        PvParam::Delta,
        PvParam::IC0,
        PvParam::IRead,
        PvParam::IWrite,
        PvParam::M,
        PvParam::PPol,
    ];

    fn tag(self) -> u64 {
        match self {
            PvParam::Delta => 1,
            PvParam::IC0 => 2,
            PvParam::IRead => 3,
            PvParam::IWrite => 4,
            PvParam::M => 5,
            PvParam::PPol => 6,
        }
    }
}

fn default_sigma() -> f64 {
    0.05
}
fn default_truncation() -> f64 {
    4.0
}
fn default_affected() -> BTreeSet<PvParam> {
    PvParam::ALL.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvConfig {
    /// Relative standard deviation of every affected parameter.
    #[serde(default = "default_sigma")]
    pub sigma_rel: f64,
    #[serde(default = "default_affected")]
    pub affected: BTreeSet<PvParam>,
    #[serde(default)]
    pub seed: u64,
    /// Symmetric truncation bound, in units of σ.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
}

impl Default for PvConfig {
    fn default() -> Self {
        Self {
            sigma_rel: default_sigma(),
            affected: default_affected(),
            seed: 0,
            truncation: default_truncation(),
        }
    }
}

impl PvConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.sigma_rel >= 0.0 && self.sigma_rel.is_finite()) {
            return Err(ParamError::Invalid {
                name: "sigma_rel",
                value: self.sigma_rel,
                reason: "must be non-negative and finite",
            });
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(ParamError::Invalid {
                name: "truncation",
                value: self.truncation,
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }
}

/// Physical cell address inside the cache array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub set: u32,
    pub way: u32,
    pub bit: u32,
}

impl CellId {
    pub fn new(set: usize, way: usize, bit: usize) -> Self {
        Self {
            set: set as u32,
            way: way as u32,
            bit: bit as u32,
        }
    }
}

/// Multiplicative deviations of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvFactors {
    pub delta: f64,
    pub i_c0: f64,
    pub i_read: f64,
    pub i_write: f64,
    pub m: f64,
    pub p_pol: f64,
}

impl Default for PvFactors {
    fn default() -> Self {
        Self {
            delta: 1.0,
            i_c0: 1.0,
            i_read: 1.0,
            i_write: 1.0,
            m: 1.0,
            p_pol: 1.0,
        }
    }
}

/// Relative floor keeping sampled parameters strictly positive.
const FLOOR_REL: f64 = 1e-9;

fn floored(nominal: f64, factor: f64) -> f64 {
    let v = nominal * factor;
    let floor = nominal.abs() * FLOOR_REL;
    if v < floor {
        floor
    } else {
        v
    }
}

impl PvFactors {
    /// Applies the factors to a parameter set. With all factors equal to one
    /// the output equals the input exactly.
    pub fn apply(&self, nominal: &CellParams) -> CellParams {
        let mut out = nominal.clone();
        out.delta = floored(nominal.delta, self.delta);
        if let Some(e_b) = nominal.e_b {
            out.e_b = Some(floored(e_b, self.delta));
        }
        out.i_c0 = floored(nominal.i_c0, self.i_c0);
        out.i_read = floored(nominal.i_read, self.i_read);
        out.i_write = floored(nominal.i_write, self.i_write);
        out.m = floored(nominal.m, self.m);
        out.p_pol = floored(nominal.p_pol, self.p_pol).min(1.0 - FLOOR_REL);
        out
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit key for a sequence of words.
pub(crate) fn mix_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x5354_542D_4D52_414D, |h, &w| splitmix64(h ^ w))
}

/// Seeded, stateless per-cell deviation model.
#[derive(Clone, Debug)]
pub struct PvModel {
    config: PvConfig,
}

impl PvModel {
    pub fn new(config: PvConfig) -> Result<Self, ParamError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &PvConfig {
        &self.config
    }

    /// True when sampling can only return the nominal parameters.
    pub fn is_degenerate(&self) -> bool {
        self.config.sigma_rel == 0.0 || self.config.affected.is_empty()
    }

    /// Standard-normal draw for `(id, param)` truncated to `±truncation`.
    pub fn standard_draw(&self, id: CellId, param: PvParam) -> f64 {
        let key = mix_words(&[
            self.config.seed,
            id.set as u64,
            id.way as u64,
            id.bit as u64,
            param.tag(),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        loop {
            let z: f64 = StandardNormal.sample(&mut rng);
            if z.abs() <= self.config.truncation {
                return z;
            }
        }
    }

    /// Multiplicative factor for one parameter of one cell.
    pub fn factor(&self, id: CellId, param: PvParam) -> f64 {
        if self.config.sigma_rel == 0.0 || !self.config.affected.contains(&param) {
            return 1.0;
        }
        1.0 + self.config.sigma_rel * self.standard_draw(id, param)
    }

    pub fn factors(&self, id: CellId) -> PvFactors {
        if self.is_degenerate() {
            return PvFactors::default();
        }
        PvFactors {
            delta: self.factor(id, PvParam::Delta),
            i_c0: self.factor(id, PvParam::IC0),
            i_read: self.factor(id, PvParam::IRead),
            i_write: self.factor(id, PvParam::IWrite),
            m: self.factor(id, PvParam::M),
            p_pol: self.factor(id, PvParam::PPol),
        }
    }

    pub fn sample_cell(&self, nominal: &CellParams, id: CellId) -> CellParams {
        self.factors(id).apply(nominal)
    }
}

/// Samples one cell's parameters; see [`PvModel::sample_cell`].
pub fn sample_cell(
    config: &PvConfig,
    nominal: &CellParams,
    id: CellId,
) -> Result<CellParams, ParamError> {
    Ok(PvModel::new(config.clone())?.sample_cell(nominal, id))
}
