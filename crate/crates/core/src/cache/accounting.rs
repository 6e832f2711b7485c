use serde::Serialize;

use super::ns_to_s;

/// Per-cell counters, needed only by the process-variation path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PerBitCounters {
    pub vulnerable_ns: Vec<u64>,
    pub ones_read: Vec<u64>,
    pub trans_0to1: Vec<u64>,
    pub trans_1to0: Vec<u64>,
}

impl PerBitCounters {
    pub fn new(bits: usize) -> Self {
        Self {
            vulnerable_ns: vec![0; bits],
            ones_read: vec![0; bits],
            trans_0to1: vec![0; bits],
            trans_1to0: vec![0; bits],
        }
    }
}

/// Everything the reliability formulas need from one physical block frame.
///
/// Times are integer nanoseconds so interval sums are exact.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BlockAccounting {
    pub set: usize,
    pub way: usize,
    /// Idle time ended by a read (errors in it are observed).
    pub vulnerable_idle_ns: u64,
    /// Idle time of every interval, including ones ended by writes,
    /// evictions and the end of the run.
    pub all_idle_ns: u64,
    /// Σ over reads of the number of vulnerable cells at read time.
    pub ones_read_total: u64,
    pub reads_total: u64,
    pub writes_total: u64,
    pub trans_0to1_total: u64,
    pub trans_1to0_total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_bit: Option<PerBitCounters>,
}

impl BlockAccounting {
    pub fn new(set: usize, way: usize, per_bit: Option<usize>) -> Self {
        Self {
            set,
            way,
            per_bit: per_bit.map(PerBitCounters::new),
            ..Self::default()
        }
    }

    /// Vulnerable idle time, seconds.
    pub fn vulnerable_idle_time(&self) -> f64 {
        ns_to_s(self.vulnerable_idle_ns)
    }

    /// All idle time, seconds.
    pub fn all_idle_time(&self) -> f64 {
        ns_to_s(self.all_idle_ns)
    }

    /// Checks the internal consistency of the counters for an `n_bits` block.
    pub fn check(&self, n_bits: usize) -> Result<(), String> {
        let n = n_bits as u64;
        if self.vulnerable_idle_ns > self.all_idle_ns {
            return Err(format!(
                "block ({}, {}): vulnerable time {} exceeds total idle time {}",
                self.set, self.way, self.vulnerable_idle_ns, self.all_idle_ns
            ));
        }
        if self.ones_read_total > n * self.reads_total {
            return Err(format!(
                "block ({}, {}): ones read exceed N x reads",
                self.set, self.way
            ));
        }
        if self.trans_0to1_total > n * self.writes_total
            || self.trans_1to0_total > n * self.writes_total
        {
            return Err(format!(
                "block ({}, {}): transitions exceed N x writes",
                self.set, self.way
            ));
        }
        if let Some(pb) = &self.per_bit {
            if pb
                .vulnerable_ns
                .iter()
                .any(|&t| t != self.vulnerable_idle_ns)
            {
                return Err(format!(
                    "block ({}, {}): per-bit vulnerable time differs between cells",
                    self.set, self.way
                ));
            }
            let sums = [
                (
                    pb.ones_read.iter().sum::<u64>(),
                    self.ones_read_total,
                    "ones read",
                ),
                (
                    pb.trans_0to1.iter().sum::<u64>(),
                    self.trans_0to1_total,
                    "0->1 transitions",
                ),
                (
                    pb.trans_1to0.iter().sum::<u64>(),
                    self.trans_1to0_total,
                    "1->0 transitions",
                ),
            ];
            for (per_bit, total, what) in sums {
                if per_bit != total {
                    return Err(format!(
                        "block ({}, {}): per-bit {what} sum {per_bit} != total {total}",
                        self.set, self.way
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Scalar totals over the whole cache.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheTotals {
    pub vulnerable_idle_ns: u128,
    pub all_idle_ns: u128,
    pub ones_read: u128,
    pub reads: u128,
    pub writes: u128,
    pub trans_0to1: u128,
    pub trans_1to0: u128,
}

/// Closed books of a replay: one entry per physical block frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CacheAccounting {
    pub block_bits: usize,
    pub start_ns: u64,
    pub end_ns: u64,
    pub blocks: Vec<BlockAccounting>,
}

impl CacheAccounting {
    pub fn t_exe_ns(&self) -> u64 {
        self.end_ns - self.start_ns
    }

    /// Execution time, seconds.
    pub fn t_exe(&self) -> f64 {
        ns_to_s(self.t_exe_ns())
    }

    pub fn totals(&self) -> CacheTotals {
        self.blocks.iter().fold(CacheTotals::default(), |mut t, b| {
            t.vulnerable_idle_ns += b.vulnerable_idle_ns as u128;
            t.all_idle_ns += b.all_idle_ns as u128;
            t.ones_read += b.ones_read_total as u128;
            t.reads += b.reads_total as u128;
            t.writes += b.writes_total as u128;
            t.trans_0to1 += b.trans_0to1_total as u128;
            t.trans_1to0 += b.trans_1to0_total as u128;
            t
        })
    }

    pub fn has_per_bit(&self) -> bool {
        self.blocks.iter().all(|b| b.per_bit.is_some())
    }

    pub fn check(&self) -> Result<(), String> {
        self.blocks
            .iter()
            .try_for_each(|b| b.check(self.block_bits))
    }
}
