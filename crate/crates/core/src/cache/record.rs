use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessKind {
    Read,
    Write,
    /// Installs a block from the next level with the given payload.
    Fill,
    /// Drops a block without writing it.
    Evict,
}

impl AccessKind {
    pub fn needs_payload(self) -> bool {
        matches!(self, AccessKind::Write | AccessKind::Fill)
    }
}

/// One access of the replayed trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub timestamp_ns: u64,
    pub kind: AccessKind,
    pub address: u64,
    /// Block-sized payload, present for writes and fills.
    pub data: Option<Vec<u8>>,
}

impl AccessRecord {
    pub fn read(timestamp_ns: u64, address: u64) -> Self {
        Self {
            timestamp_ns,
            kind: AccessKind::Read,
            address,
            data: None,
        }
    }

    pub fn write(timestamp_ns: u64, address: u64, data: Vec<u8>) -> Self {
        Self {
            timestamp_ns,
            kind: AccessKind::Write,
            address,
            data: Some(data),
        }
    }

    pub fn fill(timestamp_ns: u64, address: u64, data: Vec<u8>) -> Self {
        Self {
            timestamp_ns,
            kind: AccessKind::Fill,
            address,
            data: Some(data),
        }
    }

    pub fn evict(timestamp_ns: u64, address: u64) -> Self {
        Self {
            timestamp_ns,
            kind: AccessKind::Evict,
            address,
            data: None,
        }
    }
}
