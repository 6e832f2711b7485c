//! Replacement policies. Invalid ways are always filled first; a policy is
//! only consulted when every way of a set holds a valid block.

pub trait ReplacementPolicy: Send + Sync {
    /// The block in `(set, way)` was hit.
    fn touch(&mut self, set: usize, way: usize);
    /// A new block was installed in `(set, way)`.
    fn install(&mut self, set: usize, way: usize);
    /// Way to evict from a full set.
    fn victim(&self, set: usize) -> usize;
}

/// Least-recently-used, tracked with per-way access stamps.
#[derive(Clone, Debug)]
pub struct LruPolicy {
    ways: usize,
    stamps: Vec<u64>,
    clock: u64,
}

impl LruPolicy {
    pub fn new(num_sets: usize, ways: usize) -> Self {
        Self {
            ways,
            stamps: vec![0; num_sets * ways],
            clock: 0,
        }
    }
}

impl ReplacementPolicy for LruPolicy {
    fn touch(&mut self, set: usize, way: usize) {
        self.clock += 1;
        self.stamps[set * self.ways + way] = self.clock;
    }

    fn install(&mut self, set: usize, way: usize) {
        self.touch(set, way);
    }

    fn victim(&self, set: usize) -> usize {
        let row = &self.stamps[set * self.ways..(set + 1) * self.ways];
        (0..self.ways).min_by_key(|&w| row[w]).unwrap_or(0)
    }
}

/// First-in first-out: hits do not refresh a block.
#[derive(Clone, Debug)]
pub struct FifoPolicy {
    inner: LruPolicy,
}

impl FifoPolicy {
    pub fn new(num_sets: usize, ways: usize) -> Self {
        Self {
            inner: LruPolicy::new(num_sets, ways),
        }
    }
}

impl ReplacementPolicy for FifoPolicy {
    fn touch(&mut self, _set: usize, _way: usize) {}

    fn install(&mut self, set: usize, way: usize) {
        self.inner.touch(set, way);
    }

    fn victim(&self, set: usize) -> usize {
        self.inner.victim(set)
    }
}
