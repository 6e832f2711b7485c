//! Trace replay through a set-associative cache.
//!
//! Rules for idle intervals of a block frame:
//!
//! - an interval ended by a read is vulnerable (retention errors are observed);
//! - an interval ended by a write, an eviction or the end of the run is masked;
//! - both kinds are added to the all-intervals total.
//!
//! A block installed on a miss (or by an explicit fill) is counted as a write
//! whose previous content is all zeros. Read misses only install the block;
//! the requested data is served from the fill, not read back from the cells.

use std::collections::HashMap;

use thiserror::Error;

use super::accounting::{BlockAccounting, CacheAccounting};
use super::bits::{bit, count_ones, transitions};
use super::geometry::{CacheGeometry, ReplacementKind, VulnerableValue};
use super::policy::{FifoPolicy, LruPolicy, ReplacementPolicy};
use super::record::{AccessKind, AccessRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AccessError {
    #[error("invalid cache geometry: {0}")]
    Geometry(String),
    #[error("malformed {kind:?} record at {timestamp_ns} ns: payload has {got} bytes, block size is {expected}")]
    MalformedPayload {
        kind: AccessKind,
        timestamp_ns: u64,
        expected: usize,
        got: usize,
    },
    #[error("time regression: {current_ns} ns after {previous_ns} ns")]
    TimeRegression { previous_ns: u64, current_ns: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameId {
    pub set: usize,
    pub way: usize,
}

/// State of the access history a read observes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReadHistory {
    /// Idle interval the read terminates.
    pub idle_ns: u64,
    /// Transitions of the most recent write (or fill) of the block.
    pub last_write_0to1: u64,
    pub last_write_1to0: u64,
    /// Vulnerable cells at read time.
    pub ones_read: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Eviction {
    pub frame: FrameId,
    pub block_address: u64,
    /// Masked idle time between the victim's last event and the eviction.
    pub trailing_ns: u64,
}

/// What one record did to the cache.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccessOutcome {
    pub kind: AccessKind,
    /// Frame the access landed in; `None` for an evict of a non-resident block.
    pub frame: Option<FrameId>,
    pub hit: bool,
    /// The block was (re)installed by this access.
    pub installed: bool,
    pub vulnerable_ns: u64,
    /// Masked idle time closed by this access in `frame` (not the victim's).
    pub masked_ns: u64,
    pub ones_read: u64,
    pub trans_0to1: u64,
    pub trans_1to0: u64,
    pub evicted: Option<Eviction>,
    /// Present for reads served from the cells.
    pub read: Option<ReadHistory>,
}

impl AccessOutcome {
    fn new(kind: AccessKind) -> Self {
        Self {
            kind,
            frame: None,
            hit: false,
            installed: false,
            vulnerable_ns: 0,
            masked_ns: 0,
            ones_read: 0,
            trans_0to1: 0,
            trans_1to0: 0,
            evicted: None,
            read: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ModelOptions {
    pub vulnerable: VulnerableValue,
    /// Keep per-cell counters (required by the process-variation path).
    pub track_per_bit: bool,
    /// Start of the execution window.
    pub start_ns: u64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            vulnerable: VulnerableValue::One,
            track_per_bit: false,
            start_ns: 0,
        }
    }
}

struct Frame {
    tag: u64,
    valid: bool,
    content: Vec<u8>,
    last_event_ns: u64,
    last_write: (u64, u64),
    acct: BlockAccounting,
}

pub struct CacheModel {
    geometry: CacheGeometry,
    options: ModelOptions,
    frames: Vec<Frame>,
    policy: Box<dyn ReplacementPolicy>,
    /// Latest data of every block address ever written or filled.
    backing: HashMap<u64, Vec<u8>>,
    clock_ns: u64,
}

impl CacheModel {
    pub fn new(geometry: CacheGeometry, options: ModelOptions) -> Result<Self, AccessError> {
        geometry.validate()?;
        let policy: Box<dyn ReplacementPolicy> = match geometry.replacement {
            ReplacementKind::Lru => {
                Box::new(LruPolicy::new(geometry.num_sets, geometry.associativity))
            }
            ReplacementKind::Fifo => {
                Box::new(FifoPolicy::new(geometry.num_sets, geometry.associativity))
            }
        };
        Self::with_policy(geometry, options, policy)
    }

    pub fn with_policy(
        geometry: CacheGeometry,
        options: ModelOptions,
        policy: Box<dyn ReplacementPolicy>,
    ) -> Result<Self, AccessError> {
        geometry.validate()?;
        let bits = geometry.block_bits();
        let per_bit = options.track_per_bit.then_some(bits);
        let frames = (0..geometry.num_sets)
            .flat_map(|set| (0..geometry.associativity).map(move |way| (set, way)))
            .map(|(set, way)| Frame {
                tag: 0,
                valid: false,
                content: vec![0; geometry.block_bytes],
                last_event_ns: options.start_ns,
                last_write: (0, 0),
                acct: BlockAccounting::new(set, way, per_bit),
            })
            .collect();
        Ok(Self {
            geometry,
            options,
            frames,
            policy,
            backing: HashMap::new(),
            clock_ns: options.start_ns,
        })
    }

    pub fn geometry(&self) -> &CacheGeometry {
        &self.geometry
    }

    pub fn options(&self) -> &ModelOptions {
        &self.options
    }

    /// Timestamp of the latest applied record.
    pub fn clock_ns(&self) -> u64 {
        self.clock_ns
    }

    fn index(&self, frame: FrameId) -> usize {
        frame.set * self.geometry.associativity + frame.way
    }

    pub fn lookup(&self, address: u64) -> Option<FrameId> {
        let (set, tag) = self.geometry.locate(address);
        (0..self.geometry.associativity)
            .map(|way| FrameId { set, way })
            .find(|&f| {
                let fr = &self.frames[self.index(f)];
                fr.valid && fr.tag == tag
            })
    }

    pub fn content(&self, frame: FrameId) -> &[u8] {
        &self.frames[self.index(frame)].content
    }

    pub fn is_valid(&self, frame: FrameId) -> bool {
        self.frames[self.index(frame)].valid
    }

    pub fn block_accounting(&self, frame: FrameId) -> &BlockAccounting {
        &self.frames[self.index(frame)].acct
    }

    pub fn apply_access(&mut self, rec: &AccessRecord) -> Result<AccessOutcome, AccessError> {
        if rec.kind.needs_payload() {
            let got = rec.data.as_ref().map_or(0, Vec::len);
            if got != self.geometry.block_bytes {
                return Err(AccessError::MalformedPayload {
                    kind: rec.kind,
                    timestamp_ns: rec.timestamp_ns,
                    expected: self.geometry.block_bytes,
                    got,
                });
            }
        }
        if rec.timestamp_ns < self.clock_ns {
            return Err(AccessError::TimeRegression {
                previous_ns: self.clock_ns,
                current_ns: rec.timestamp_ns,
            });
        }
        self.clock_ns = rec.timestamp_ns;
        let now = rec.timestamp_ns;
        let block_address = self.geometry.block_address(rec.address);
        let mut out = AccessOutcome::new(rec.kind);

        match rec.kind {
            AccessKind::Read => match self.lookup(block_address) {
                Some(frame) => {
                    out.frame = Some(frame);
                    out.hit = true;
                    self.read_hit(frame, now, &mut out);
                }
                None => {
                    let data = self
                        .backing
                        .get(&block_address)
                        .cloned()
                        .unwrap_or_else(|| vec![0; self.geometry.block_bytes]);
                    self.install(block_address, &data, now, &mut out);
                }
            },
            AccessKind::Write | AccessKind::Fill => {
                let data = rec.data.as_deref().unwrap_or_default();
                match self.lookup(block_address) {
                    Some(frame) => {
                        out.frame = Some(frame);
                        out.hit = true;
                        self.write_hit(frame, data, now, &mut out);
                    }
                    None => self.install(block_address, data, now, &mut out),
                }
                self.backing.insert(block_address, data.to_vec());
            }
            AccessKind::Evict => {
                if let Some(frame) = self.lookup(block_address) {
                    out.frame = Some(frame);
                    out.hit = true;
                    out.evicted = Some(self.evict(frame, now));
                }
            }
        }
        Ok(out)
    }

    fn read_hit(&mut self, frame: FrameId, now: u64, out: &mut AccessOutcome) {
        let vulnerable = self.options.vulnerable;
        let idx = self.index(frame);
        let fr = &mut self.frames[idx];
        let interval = now - fr.last_event_ns;
        let ones = count_ones(&fr.content, vulnerable);
        let acct = &mut fr.acct;
        acct.vulnerable_idle_ns += interval;
        acct.all_idle_ns += interval;
        acct.ones_read_total += ones;
        acct.reads_total += 1;
        if let Some(pb) = acct.per_bit.as_mut() {
            let want = vulnerable == VulnerableValue::One;
            for i in 0..pb.vulnerable_ns.len() {
                pb.vulnerable_ns[i] += interval;
                if bit(&fr.content, i) == want {
                    pb.ones_read[i] += 1;
                }
            }
        }
        fr.last_event_ns = now;
        out.vulnerable_ns = interval;
        out.ones_read = ones;
        out.read = Some(ReadHistory {
            idle_ns: interval,
            last_write_0to1: fr.last_write.0,
            last_write_1to0: fr.last_write.1,
            ones_read: ones,
        });
        self.policy.touch(frame.set, frame.way);
    }

    fn write_hit(&mut self, frame: FrameId, data: &[u8], now: u64, out: &mut AccessOutcome) {
        let idx = self.index(frame);
        let fr = &mut self.frames[idx];
        let interval = now - fr.last_event_ns;
        fr.acct.all_idle_ns += interval;
        out.masked_ns = interval;
        Self::overwrite(fr, data, out);
        fr.last_event_ns = now;
        self.policy.touch(frame.set, frame.way);
    }

    /// Replaces the content of a frame and books the write.
    fn overwrite(fr: &mut Frame, data: &[u8], out: &mut AccessOutcome) {
        let (up, down) = transitions(&fr.content, data);
        let acct = &mut fr.acct;
        acct.trans_0to1_total += up;
        acct.trans_1to0_total += down;
        acct.writes_total += 1;
        if let Some(pb) = acct.per_bit.as_mut() {
            for i in 0..pb.trans_0to1.len() {
                match (bit(&fr.content, i), bit(data, i)) {
                    (false, true) => pb.trans_0to1[i] += 1,
                    (true, false) => pb.trans_1to0[i] += 1,
                    _ => {}
                }
            }
        }
        fr.content.copy_from_slice(data);
        fr.last_write = (up, down);
        out.trans_0to1 = up;
        out.trans_1to0 = down;
    }

    fn evict(&mut self, frame: FrameId, now: u64) -> Eviction {
        let num_sets = self.geometry.num_sets as u64;
        let block_bytes = self.geometry.block_bytes as u64;
        let idx = self.index(frame);
        let fr = &mut self.frames[idx];
        let trailing = now - fr.last_event_ns;
        fr.acct.all_idle_ns += trailing;
        fr.valid = false;
        fr.last_event_ns = now;
        Eviction {
            frame,
            block_address: (fr.tag * num_sets + frame.set as u64) * block_bytes,
            trailing_ns: trailing,
        }
    }

    fn install(&mut self, block_address: u64, data: &[u8], now: u64, out: &mut AccessOutcome) {
        let (set, tag) = self.geometry.locate(block_address);
        let way = (0..self.geometry.associativity)
            .find(|&w| !self.frames[self.index(FrameId { set, way: w })].valid)
            .unwrap_or_else(|| self.policy.victim(set));
        let frame = FrameId { set, way };
        if self.frames[self.index(frame)].valid {
            out.evicted = Some(self.evict(frame, now));
        }
        let idx = self.index(frame);
        let fr = &mut self.frames[idx];
        fr.content.iter_mut().for_each(|b| *b = 0);
        fr.tag = tag;
        fr.valid = true;
        Self::overwrite(fr, data, out);
        fr.last_event_ns = now;
        out.frame = Some(frame);
        out.installed = true;
        self.policy.install(set, way);
    }

    /// Closes the books at `end_ns`: trailing intervals of resident blocks are
    /// masked.
    pub fn finalize(mut self, end_ns: u64) -> Result<CacheAccounting, AccessError> {
        if end_ns < self.clock_ns {
            return Err(AccessError::TimeRegression {
                previous_ns: self.clock_ns,
                current_ns: end_ns,
            });
        }
        for fr in self.frames.iter_mut().filter(|f| f.valid) {
            fr.acct.all_idle_ns += end_ns - fr.last_event_ns;
            fr.last_event_ns = end_ns;
        }
        Ok(CacheAccounting {
            block_bits: self.geometry.block_bits(),
            start_ns: self.options.start_ns,
            end_ns,
            blocks: self.frames.into_iter().map(|f| f.acct).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_block_cache() -> CacheModel {
        CacheModel::new(
            CacheGeometry::new(1, 1, 1).unwrap(),
            ModelOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn masking_sequence() {
        // W@t0 R@t1 R@t2 W@t3 R@t4 on one block.
        let (t0, t1, t2, t3, t4) = (10, 25, 45, 80, 130);
        let mut c = one_block_cache();
        c.apply_access(&AccessRecord::write(t0, 0, vec![0x0F]))
            .unwrap();
        c.apply_access(&AccessRecord::read(t1, 0)).unwrap();
        c.apply_access(&AccessRecord::read(t2, 0)).unwrap();
        c.apply_access(&AccessRecord::write(t3, 0, vec![0xFF]))
            .unwrap();
        c.apply_access(&AccessRecord::read(t4, 0)).unwrap();
        let acct = c.finalize(t4).unwrap();
        let b = &acct.blocks[0];
        assert_eq!(b.vulnerable_idle_ns, (t1 - t0) + (t2 - t1) + (t4 - t3));
        assert_eq!(b.all_idle_ns, t4 - t0);
        assert_eq!(b.reads_total, 3);
        assert_eq!(b.writes_total, 2);
        assert_eq!(b.ones_read_total, 4 + 4 + 8);
    }

    #[test]
    fn identical_rewrite_has_no_transitions() {
        let mut c = one_block_cache();
        c.apply_access(&AccessRecord::write(0, 0, vec![0x5A]))
            .unwrap();
        let o = c
            .apply_access(&AccessRecord::write(5, 0, vec![0x5A]))
            .unwrap();
        assert_eq!((o.trans_0to1, o.trans_1to0), (0, 0));
    }

    #[test]
    fn directional_transitions() {
        let mut c = one_block_cache();
        let fill = c
            .apply_access(&AccessRecord::write(0, 0, vec![0xF0]))
            .unwrap();
        // the fill is a write from the all-zero state
        assert_eq!((fill.trans_0to1, fill.trans_1to0), (4, 0));
        let o = c
            .apply_access(&AccessRecord::write(5, 0, vec![0x0F]))
            .unwrap();
        assert_eq!((o.trans_0to1, o.trans_1to0), (4, 4));
    }

    #[test]
    fn trailing_interval_is_masked() {
        let mut c = one_block_cache();
        c.apply_access(&AccessRecord::write(100, 0, vec![0xFF]))
            .unwrap();
        let acct = c.finalize(110).unwrap();
        assert_eq!(acct.blocks[0].vulnerable_idle_ns, 0);
        assert_eq!(acct.blocks[0].all_idle_ns, 10);
    }

    #[test]
    fn empty_trace_closes_with_zero_counters() {
        let geometry = CacheGeometry::new(2, 2, 4).unwrap();
        let c = CacheModel::new(
            geometry,
            ModelOptions {
                start_ns: 50,
                ..ModelOptions::default()
            },
        )
        .unwrap();
        let acct = c.finalize(1050).unwrap();
        assert_eq!(acct.t_exe_ns(), 1000);
        assert_eq!(acct.totals(), Default::default());
    }

    #[test]
    fn malformed_and_regressing_records_rejected() {
        let mut c = one_block_cache();
        assert!(matches!(
            c.apply_access(&AccessRecord::write(0, 0, vec![1, 2])),
            Err(AccessError::MalformedPayload {
                expected: 1,
                got: 2,
                ..
            })
        ));
        let mut missing = AccessRecord::write(0, 0, vec![]);
        missing.data = None;
        assert!(c.apply_access(&missing).is_err());
        c.apply_access(&AccessRecord::read(10, 0)).unwrap();
        assert!(matches!(
            c.apply_access(&AccessRecord::read(9, 0)),
            Err(AccessError::TimeRegression {
                previous_ns: 10,
                current_ns: 9
            })
        ));
        assert!(c.finalize(5).is_err());
    }

    #[test]
    fn read_miss_installs_latest_data_without_reading_cells() {
        let geometry = CacheGeometry::new(1, 1, 1).unwrap();
        let mut c = CacheModel::new(geometry, ModelOptions::default()).unwrap();
        c.apply_access(&AccessRecord::write(0, 0, vec![0x03]))
            .unwrap();
        // conflicting address evicts block 0
        let o = c
            .apply_access(&AccessRecord::write(10, 1, vec![0x01]))
            .unwrap();
        assert_eq!(o.evicted.unwrap().block_address, 0);
        assert_eq!(o.evicted.unwrap().trailing_ns, 10);
        let back = c.apply_access(&AccessRecord::read(20, 0)).unwrap();
        assert!(!back.hit && back.installed && back.read.is_none());
        assert_eq!(back.trans_0to1, 2);
        assert_eq!(c.content(back.frame.unwrap()), &[0x03]);
    }

    #[test]
    fn explicit_evict_masks_and_invalidates() {
        let mut c = one_block_cache();
        c.apply_access(&AccessRecord::write(0, 0, vec![0xFF]))
            .unwrap();
        let o = c.apply_access(&AccessRecord::evict(30, 0)).unwrap();
        assert_eq!(o.evicted.unwrap().trailing_ns, 30);
        assert!(c.lookup(0).is_none());
        let none = c.apply_access(&AccessRecord::evict(40, 0)).unwrap();
        assert!(none.frame.is_none());
        let acct = c.finalize(100).unwrap();
        assert_eq!(acct.blocks[0].all_idle_ns, 30);
    }

    #[test]
    fn zero_vulnerable_direction_counts_zeros() {
        let geometry = CacheGeometry::new(1, 1, 1).unwrap();
        let mut c = CacheModel::new(
            geometry,
            ModelOptions {
                vulnerable: VulnerableValue::Zero,
                track_per_bit: true,
                start_ns: 0,
            },
        )
        .unwrap();
        c.apply_access(&AccessRecord::write(0, 0, vec![0x07]))
            .unwrap();
        let o = c.apply_access(&AccessRecord::read(1, 0)).unwrap();
        assert_eq!(o.ones_read, 5);
        let acct = c.finalize(1).unwrap();
        let pb = acct.blocks[0].per_bit.as_ref().unwrap();
        assert_eq!(pb.ones_read, vec![0, 0, 0, 1, 1, 1, 1, 1]);
        acct.check().unwrap();
    }

    #[test]
    fn read_history_tracks_last_write() {
        let mut c = one_block_cache();
        c.apply_access(&AccessRecord::write(0, 0, vec![0x0F]))
            .unwrap();
        c.apply_access(&AccessRecord::write(4, 0, vec![0x3C]))
            .unwrap();
        let o = c.apply_access(&AccessRecord::read(9, 0)).unwrap();
        assert_eq!(
            o.read.unwrap(),
            ReadHistory {
                idle_ns: 5,
                last_write_0to1: 2,
                last_write_1to0: 2,
                ones_read: 4
            }
        );
    }
}
