//! PE-local scratchpad: a small, explicitly managed, single-cycle-access
//! buffer (the BRAM/WRAM analogue). Holds preloaded data and results pending
//! unload.
//!
//! Regions touched by an in-flight DMA request are tracked so that consuming
//! data before the matching wait, or mutating data mid-unload, surfaces as a
//! hazard error instead of silently reading garbage. A region stays in-flight
//! until the PE *observes* completion through a status/wait interaction, not
//! merely until the hardware finishes the transfer.

use alloc::vec::Vec;
use core::fmt;

use crate::pul::Direction;

/// Scratchpad access width: one 8-byte word per cycle (64-bit soft cores).
pub const WORD_BYTES: u32 = 8;

pub const DEFAULT_CAPACITY: u32 = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadError {
    OutOfBounds { offset: u32, len: u32, capacity: u32 },
    /// Consuming bytes still covered by a pending preload.
    ReadDuringPendingPreload { offset: u32, len: u32 },
    /// Mutating bytes still covered by a pending unload.
    WriteDuringPendingUnload { offset: u32, len: u32 },
}

impl fmt::Display for PadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PadError::OutOfBounds { offset, len, capacity } => {
                write!(f, "scratchpad access [{offset}, {offset}+{len}) exceeds capacity {capacity}")
            }
            PadError::ReadDuringPendingPreload { offset, len } => {
                write!(f, "read of [{offset}, {offset}+{len}) overlaps a pending preload")
            }
            PadError::WriteDuringPendingUnload { offset, len } => {
                write!(f, "write to [{offset}, {offset}+{len}) overlaps a pending unload")
            }
        }
    }
}

/// A scratchpad byte range owned by an in-flight DMA request.
#[derive(Debug, Clone, Copy)]
pub struct InFlightRegion {
    pub offset: u32,
    pub len: u32,
    pub direction: Direction,
    pub request_id: u64,
}

pub struct Scratchpad {
    capacity: u32,
    regions: Vec<InFlightRegion>,
    content: Option<Vec<u8>>,
}

impl Scratchpad {
    pub fn new(capacity: u32) -> Self {
        Scratchpad {
            capacity,
            regions: Vec::new(),
            content: None,
        }
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    /// Enables value-checking mode (content materialized, zero-filled).
    pub fn materialize(&mut self) {
        self.content = Some(alloc::vec![0u8; self.capacity as usize]);
    }

    pub fn is_materialized(&self) -> bool {
        self.content.is_some()
    }

    fn check_bounds(&self, offset: u32, len: u32) -> Result<(), PadError> {
        if offset as u64 + len as u64 > self.capacity as u64 {
            return Err(PadError::OutOfBounds {
                offset,
                len,
                capacity: self.capacity,
            });
        }
        Ok(())
    }

    fn overlaps(a_off: u32, a_len: u32, b_off: u32, b_len: u32) -> bool {
        (a_off as u64) < (b_off as u64 + b_len as u64) && (b_off as u64) < (a_off as u64 + a_len as u64)
    }

    /// Cycles a PE pays to touch `len` bytes (one word per cycle).
    pub fn access_cycles(len: u32) -> u64 {
        (len as u64).div_ceil(WORD_BYTES as u64)
    }

    /// Validates a PE read. Returns the cycle cost; content (if materialized)
    /// is obtained via [`Scratchpad::bytes`] afterwards.
    pub fn read(&self, offset: u32, len: u32) -> Result<u64, PadError> {
        self.check_bounds(offset, len)?;
        for r in &self.regions {
            if r.direction == Direction::Preload && Self::overlaps(offset, len, r.offset, r.len) {
                return Err(PadError::ReadDuringPendingPreload { offset, len });
            }
        }
        Ok(Self::access_cycles(len))
    }

    /// Validates a PE write. Zero-length writes are free no-ops.
    pub fn write(&mut self, offset: u32, len: u32, data: Option<&[u8]>) -> Result<u64, PadError> {
        if len == 0 {
            return Ok(0);
        }
        self.check_bounds(offset, len)?;
        for r in &self.regions {
            if r.direction == Direction::Unload && Self::overlaps(offset, len, r.offset, r.len) {
                return Err(PadError::WriteDuringPendingUnload { offset, len });
            }
        }
        if let (Some(content), Some(data)) = (self.content.as_mut(), data) {
            content[offset as usize..offset as usize + len as usize].copy_from_slice(data);
        }
        Ok(Self::access_cycles(len))
    }

    pub fn bytes(&self, offset: u32, len: u32) -> Option<&[u8]> {
        self.content
            .as_ref()
            .map(|c| &c[offset as usize..offset as usize + len as usize])
    }

    pub fn fill(&mut self, offset: u32, data: &[u8]) {
        if let Some(c) = self.content.as_mut() {
            c[offset as usize..offset as usize + data.len()].copy_from_slice(data);
        }
    }

    pub fn mark_in_flight(&mut self, region: InFlightRegion) {
        self.regions.push(region);
    }

    /// Releases the region owned by `request_id`, applying `incoming` bytes
    /// (a completed preload's payload) if the pad is materialized.
    pub fn clear_in_flight(&mut self, request_id: u64, incoming: Option<&[u8]>) {
        if let Some(pos) = self.regions.iter().position(|r| r.request_id == request_id) {
            let r = self.regions.swap_remove(pos);
            if let Some(data) = incoming {
                self.fill(r.offset, data);
            }
        }
    }

    pub fn in_flight_count(&self) -> usize {
        self.regions.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pad64k() -> Scratchpad {
        Scratchpad::new(DEFAULT_CAPACITY)
    }

    #[test]
    fn read_after_completed_preload_returns_data() {
        let mut pad = pad64k();
        pad.materialize();
        pad.mark_in_flight(InFlightRegion {
            offset: 0,
            len: 64,
            direction: Direction::Preload,
            request_id: 1,
        });
        let payload = [7u8; 64];
        pad.clear_in_flight(1, Some(&payload));
        assert_eq!(pad.read(0, 8).unwrap(), 1);
        assert_eq!(pad.bytes(0, 8).unwrap(), &[7u8; 8]);
    }

    #[test]
    fn read_during_pending_preload_is_hazard() {
        let mut pad = pad64k();
        pad.mark_in_flight(InFlightRegion {
            offset: 0,
            len: 64,
            direction: Direction::Preload,
            request_id: 1,
        });
        assert_eq!(
            pad.read(0, 8).unwrap_err(),
            PadError::ReadDuringPendingPreload { offset: 0, len: 8 }
        );
        // Non-overlapping read is fine.
        assert!(pad.read(64, 8).is_ok());
    }

    #[test]
    fn out_of_bounds_read() {
        let pad = pad64k();
        assert_eq!(
            pad.read(65532, 8).unwrap_err(),
            PadError::OutOfBounds { offset: 65532, len: 8, capacity: 65536 }
        );
    }

    #[test]
    fn write_then_read_back() {
        let mut pad = pad64k();
        pad.materialize();
        let data = [1, 2, 3, 4, 5, 6, 7, 8];
        assert_eq!(pad.write(128, 8, Some(&data)).unwrap(), 1);
        assert_eq!(pad.bytes(128, 8).unwrap(), &data);
    }

    #[test]
    fn write_overlapping_pending_unload_is_hazard() {
        let mut pad = pad64k();
        pad.mark_in_flight(InFlightRegion {
            offset: 256,
            len: 64,
            direction: Direction::Unload,
            request_id: 9,
        });
        assert_eq!(
            pad.write(300, 8, None).unwrap_err(),
            PadError::WriteDuringPendingUnload { offset: 300, len: 8 }
        );
        // Reads of an unload region are allowed; writes of a preload region are allowed.
        assert!(pad.read(300, 8).is_ok());
    }

    #[test]
    fn empty_write_is_free() {
        let mut pad = pad64k();
        assert_eq!(pad.write(0, 0, None).unwrap(), 0);
    }

    #[test]
    fn access_cost_is_one_cycle_per_word() {
        assert_eq!(Scratchpad::access_cycles(8), 1);
        assert_eq!(Scratchpad::access_cycles(64), 8);
        assert_eq!(Scratchpad::access_cycles(1), 1);
        assert_eq!(Scratchpad::access_cycles(9), 2);
    }
}
