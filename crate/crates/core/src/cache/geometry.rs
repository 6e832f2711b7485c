use serde::{Deserialize, Serialize};

use super::model::AccessError;

/// Replacement policy selector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementKind {
    #[default]
    Lru,
    Fifo,
}

/// Stored value that the read current can flip.
///
/// With the read current in the direction of writing `0`, cells holding `1`
/// are the vulnerable ones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VulnerableValue {
    #[default]
    One,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheGeometry {
    pub num_sets: usize,
    pub associativity: usize,
    pub block_bytes: usize,
    #[serde(default)]
    pub replacement: ReplacementKind,
}

impl CacheGeometry {
    pub fn new(
        num_sets: usize,
        associativity: usize,
        block_bytes: usize,
    ) -> Result<Self, AccessError> {
        let g = Self {
            num_sets,
            associativity,
            block_bytes,
            replacement: ReplacementKind::Lru,
        };
        g.validate()?;
        Ok(g)
    }

    /// 4 MiB, 16-way, 64-byte blocks: a shared L2 for a quad-core processor.
    pub fn shared_l2_4mib() -> Self {
        Self {
            num_sets: 4096,
            associativity: 16,
            block_bytes: 64,
            replacement: ReplacementKind::Lru,
        }
    }

    pub fn validate(&self) -> Result<(), AccessError> {
        if self.num_sets == 0 || !self.num_sets.is_power_of_two() {
            return Err(AccessError::Geometry(format!(
                "num_sets must be a positive power of two, got {}",
                self.num_sets
            )));
        }
        if self.associativity == 0 {
            return Err(AccessError::Geometry(
                "associativity must be positive".into(),
            ));
        }
        if self.block_bytes == 0 {
            return Err(AccessError::Geometry("block_bytes must be positive".into()));
        }
        if self.num_sets.checked_mul(self.associativity).is_none()
            || self.block_bits() > u32::MAX as usize
        {
            return Err(AccessError::Geometry("geometry too large".into()));
        }
        Ok(())
    }

    /// Bits per block, `N`.
    pub fn block_bits(&self) -> usize {
        self.block_bytes * 8
    }

    pub fn num_blocks(&self) -> usize {
        self.num_sets * self.associativity
    }

    /// Block-aligned address.
    pub fn block_address(&self, address: u64) -> u64 {
        address - address % self.block_bytes as u64
    }

    /// `(set, tag)` of an address.
    pub fn locate(&self, address: u64) -> (usize, u64) {
        let block = address / self.block_bytes as u64;
        let set = (block % self.num_sets as u64) as usize;
        (set, block / self.num_sets as u64)
    }
}
