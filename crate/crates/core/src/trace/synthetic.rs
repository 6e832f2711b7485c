use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Zipf};
use serde::{Deserialize, Serialize};

use super::TraceError;
use crate::cache::AccessRecord;

fn default_true() -> bool {
    true
}

/// Parameterised workload: timing, address locality and data content.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Length of the request phase after the initial fills.
    pub duration_ns: u64,
    /// Mean requests per microsecond (Poisson arrivals).
    pub request_rate: f64,
    pub read_fraction: f64,
    /// Number of distinct blocks touched.
    pub working_set_blocks: u64,
    /// Zipf exponent of block popularity; 0 is uniform.
    pub zipf_exponent: f64,
    /// Probability that a freshly drawn bit is one.
    pub ones_density: f64,
    /// Probability that a bit keeps its previous value on a rewrite.
    pub rewrite_similarity: f64,
    pub block_bytes: usize,
    #[serde(default)]
    pub base_address: u64,
    /// Emit one fill per working-set block at time zero.
    #[serde(default = "default_true")]
    pub initial_fill: bool,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), TraceError> {
        let fraction = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(TraceError::InvalidSpec(format!(
                    "{name} = {v} is outside [0, 1]"
                )))
            }
        };
        fraction("read_fraction", self.read_fraction)?;
        fraction("ones_density", self.ones_density)?;
        fraction("rewrite_similarity", self.rewrite_similarity)?;
        if !(self.request_rate > 0.0 && self.request_rate.is_finite()) {
            return Err(TraceError::InvalidSpec(format!(
                "request_rate = {} must be positive",
                self.request_rate
            )));
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return Err(TraceError::InvalidSpec(format!(
                "zipf_exponent = {} must be non-negative",
                self.zipf_exponent
            )));
        }
        if self.working_set_blocks == 0 || self.block_bytes == 0 || self.duration_ns == 0 {
            return Err(TraceError::InvalidSpec(
                "working_set_blocks, block_bytes and duration_ns must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Record stream produced by [`generate`].
pub struct SyntheticTrace {
    spec: SyntheticSpec,
    rng: ChaCha8Rng,
    zipf: Zipf<f64>,
    gap: Exp<f64>,
    contents: Vec<Option<Vec<u8>>>,
    next_fill: u64,
    clock: f64,
}

/// Deterministic synthetic trace for `(spec, seed)`.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticTrace, TraceError> {
    spec.validate()?;
    let zipf = Zipf::new(spec.working_set_blocks as f64, spec.zipf_exponent)
        .map_err(|e| TraceError::InvalidSpec(format!("zipf: {e}")))?;
    let gap = Exp::new(spec.request_rate / 1000.0)
        .map_err(|e| TraceError::InvalidSpec(format!("request_rate: {e}")))?;
    Ok(SyntheticTrace {
        spec: spec.clone(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        zipf,
        gap,
        contents: vec![None; spec.working_set_blocks as usize],
        next_fill: if spec.initial_fill {
            0
        } else {
            spec.working_set_blocks
        },
        clock: 0.0,
    })
}

impl SyntheticTrace {
    fn address(&self, block: u64) -> u64 {
        self.spec.base_address + block * self.spec.block_bytes as u64
    }

    fn fresh_payload(&mut self) -> Vec<u8> {
        let density = self.spec.ones_density;
        (0..self.spec.block_bytes)
            .map(|_| {
                (0..8).fold(0u8, |b, i| {
                    b | (u8::from(self.rng.random_bool(density)) << i)
                })
            })
            .collect()
    }

    fn current(&mut self, block: usize) -> Vec<u8> {
        match &self.contents[block] {
            Some(c) => c.clone(),
            None => {
                let c = self.fresh_payload();
                self.contents[block] = Some(c.clone());
                c
            }
        }
    }

    /// Keeps each bit with probability `rewrite_similarity`, redraws it otherwise.
    fn rewrite(&mut self, block: usize) -> Vec<u8> {
        let mut data = self.current(block);
        let (keep, density) = (self.spec.rewrite_similarity, self.spec.ones_density);
        for byte in data.iter_mut() {
            for i in 0..8 {
                if !self.rng.random_bool(keep) {
                    let one = self.rng.random_bool(density);
                    *byte = (*byte & !(1 << i)) | (u8::from(one) << i);
                }
            }
        }
        self.contents[block] = Some(data.clone());
        data
    }
}

impl Iterator for SyntheticTrace {
    type Item = AccessRecord;

    fn next(&mut self) -> Option<AccessRecord> {
        if self.next_fill < self.spec.working_set_blocks {
            let block = self.next_fill;
            self.next_fill += 1;
            let data = self.current(block as usize);
            return Some(AccessRecord::fill(0, self.address(block), data));
        }
        self.clock += self.gap.sample(&mut self.rng);
        if self.clock > self.spec.duration_ns as f64 {
            return None;
        }
        let ts = self.clock as u64;
        let rank = self.zipf.sample(&mut self.rng) as u64;
        let block = rank.clamp(1, self.spec.working_set_blocks) - 1;
        let addr = self.address(block);
        if self.rng.random_bool(self.spec.read_fraction) {
            Some(AccessRecord::read(ts, addr))
        } else {
            let data = self.rewrite(block as usize);
            Some(AccessRecord::write(ts, addr, data))
        }
    }
}
