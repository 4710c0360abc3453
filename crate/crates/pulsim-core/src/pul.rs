//! The preload/unload DMA engine: two bounded FIFO request queues (one per
//! direction), a transfer-size register with write-skipping, and a pollable
//! status register exposing aggregate pending counts.
//!
//! Enqueued requests are dispatched to memory immediately and without
//! blocking the PE; the engine only applies back-pressure when a queue
//! already holds [`FIFO_DEPTH`] incomplete requests. A hardware slot frees
//! the moment its transfer completes, but the *PE's* view (scratchpad
//! in-flight regions, completion bookkeeping) advances only when the PE polls
//! the status register or waits — completion is learned, not pushed.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::memory::TransferTicket;
use crate::time::SimTime;

pub const FIFO_DEPTH: usize = 64;
pub const DEFAULT_TRANSFER_SIZE: u32 = 64;
pub const MIN_TRANSFER_SIZE: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Preload,
    Unload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueKind {
    Preloads,
    Unloads,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulError {
    /// Transfer size not in `[8, scratchpad capacity]` or not 8-aligned.
    InvalidTransferSize { bytes: u32, max: u32 },
    ZeroSizeTransfer,
}

impl fmt::Display for PulError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulError::InvalidTransferSize { bytes, max } => {
                write!(f, "transfer size {bytes} invalid: must be a multiple of 8 in [8, {max}]")
            }
            PulError::ZeroSizeTransfer => write!(f, "zero-size transfer"),
        }
    }
}

/// One preload or unload request as written into the engine's registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DmaRequest {
    pub direction: Direction,
    pub main_addr: u64,
    pub pad_offset: u32,
    pub size_bytes: u32,
    pub enqueued_at: SimTime,
}

struct PendingEntry {
    request: DmaRequest,
    ticket: TransferTicket,
    /// Captured main-memory bytes for a preload (value mode only), applied
    /// to the scratchpad when the PE observes completion.
    payload: Option<Vec<u8>>,
}

/// A retired (completed and observed) request, for scratchpad release.
pub struct Retired {
    pub request_id: u64,
    pub direction: Direction,
    pub payload: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PulCounters {
    pub enqueued_preloads: u64,
    pub enqueued_unloads: u64,
    pub retired_preloads: u64,
    pub retired_unloads: u64,
    pub bytes_preloaded: u64,
    pub bytes_unloaded: u64,
}

pub struct PulEngine {
    preload_fifo: VecDeque<PendingEntry>,
    unload_fifo: VecDeque<PendingEntry>,
    fifo_depth: usize,
    size_register: u32,
    size_register_max: u32,
    register_write_count: u64,
    counters: PulCounters,
}

impl PulEngine {
    /// `size_register_max` is the attached scratchpad's capacity.
    pub fn new(fifo_depth: usize, size_register_max: u32) -> Self {
        PulEngine {
            preload_fifo: VecDeque::new(),
            unload_fifo: VecDeque::new(),
            fifo_depth,
            size_register: DEFAULT_TRANSFER_SIZE,
            size_register_max,
            register_write_count: 0,
            counters: PulCounters::default(),
        }
    }

    pub fn validate_size(&self, bytes: u32) -> Result<(), PulError> {
        if bytes == 0 {
            return Err(PulError::ZeroSizeTransfer);
        }
        if bytes < MIN_TRANSFER_SIZE || bytes % 8 != 0 || bytes > self.size_register_max {
            return Err(PulError::InvalidTransferSize {
                bytes,
                max: self.size_register_max,
            });
        }
        Ok(())
    }

    /// Writes the transfer-size register. Returns true when the register
    /// actually changed; identical values skip the write entirely
    /// (register-value buffering), costing the PE nothing.
    pub fn set_transfer_size(&mut self, bytes: u32) -> Result<bool, PulError> {
        self.validate_size(bytes)?;
        if bytes == self.size_register {
            return Ok(false);
        }
        self.size_register = bytes;
        self.register_write_count += 1;
        Ok(true)
    }

    pub fn size_register(&self) -> u32 {
        self.size_register
    }

    pub fn register_write_count(&self) -> u64 {
        self.register_write_count
    }

    pub fn counters(&self) -> &PulCounters {
        &self.counters
    }

    fn fifo(&self, direction: Direction) -> &VecDeque<PendingEntry> {
        match direction {
            Direction::Preload => &self.preload_fifo,
            Direction::Unload => &self.unload_fifo,
        }
    }

    /// Requests in `direction`'s queue that are still incomplete at `t`
    /// (hardware occupancy; a slot frees at completion time).
    pub fn occupancy(&self, direction: Direction, t: SimTime) -> usize {
        self.fifo(direction)
            .iter()
            .filter(|e| e.ticket.completion_time > t)
            .count()
    }

    pub fn can_enqueue(&self, direction: Direction, t: SimTime) -> bool {
        self.occupancy(direction, t) < self.fifo_depth
    }

    /// When a full queue next frees a slot: the oldest incomplete request's
    /// completion (per-queue completions are in enqueue order).
    pub fn next_slot_free(&self, direction: Direction, t: SimTime) -> Option<SimTime> {
        self.fifo(direction)
            .iter()
            .map(|e| e.ticket.completion_time)
            .find(|&c| c > t)
    }

    /// The status register's pending counts as observed at time `t`.
    pub fn pending(&self, kind: QueueKind, t: SimTime) -> usize {
        match kind {
            QueueKind::Preloads => self.occupancy(Direction::Preload, t),
            QueueKind::Unloads => self.occupancy(Direction::Unload, t),
            QueueKind::All => {
                self.occupancy(Direction::Preload, t) + self.occupancy(Direction::Unload, t)
            }
        }
    }

    /// Earliest instant at which `pending(kind) <= max_pending`. `None` means
    /// the condition already holds for any `t`.
    pub fn pending_drops_to(&self, kind: QueueKind, max_pending: usize) -> Option<SimTime> {
        let mut completions: Vec<SimTime> = match kind {
            QueueKind::Preloads => self.preload_fifo.iter().map(|e| e.ticket.completion_time).collect(),
            QueueKind::Unloads => self.unload_fifo.iter().map(|e| e.ticket.completion_time).collect(),
            QueueKind::All => {
                let mut v: Vec<SimTime> = self
                    .preload_fifo
                    .iter()
                    .chain(self.unload_fifo.iter())
                    .map(|e| e.ticket.completion_time)
                    .collect();
                v.sort_unstable();
                v
            }
        };
        if kind != QueueKind::All {
            debug_assert!(completions.windows(2).all(|w| w[0] <= w[1]));
        }
        if completions.len() <= max_pending {
            return None;
        }
        // pending(t) <= max once all but the newest `max` completions are <= t.
        let idx = completions.len() - max_pending - 1;
        Some(completions[idx])
    }

    /// Queues a validated request whose memory timing is already resolved.
    pub fn enqueue(&mut self, request: DmaRequest, ticket: TransferTicket, payload: Option<Vec<u8>>) {
        debug_assert!(self.can_enqueue(request.direction, request.enqueued_at));
        let entry = PendingEntry {
            request,
            ticket,
            payload,
        };
        match request.direction {
            Direction::Preload => {
                self.counters.enqueued_preloads += 1;
                self.counters.bytes_preloaded += request.size_bytes as u64;
                self.preload_fifo.push_back(entry);
            }
            Direction::Unload => {
                self.counters.enqueued_unloads += 1;
                self.counters.bytes_unloaded += request.size_bytes as u64;
                self.unload_fifo.push_back(entry);
            }
        }
    }

    /// Removes every request whose completion the PE can observe at `t`,
    /// front of each queue first (completion order matches enqueue order
    /// per queue). The caller releases the matching scratchpad regions.
    pub fn retire_completed(&mut self, t: SimTime) -> Vec<Retired> {
        let mut retired = Vec::new();
        while let Some(front) = self.preload_fifo.front() {
            if front.ticket.completion_time <= t {
                let e = self.preload_fifo.pop_front().unwrap();
                self.counters.retired_preloads += 1;
                retired.push(Retired {
                    request_id: e.ticket.request_id,
                    direction: Direction::Preload,
                    payload: e.payload,
                });
            } else {
                break;
            }
        }
        while let Some(front) = self.unload_fifo.front() {
            if front.ticket.completion_time <= t {
                let e = self.unload_fifo.pop_front().unwrap();
                self.counters.retired_unloads += 1;
                retired.push(Retired {
                    request_id: e.ticket.request_id,
                    direction: Direction::Unload,
                    payload: e.payload,
                });
            } else {
                break;
            }
        }
        retired
    }

    /// Unretired requests remaining in either queue (e.g. at end of run).
    pub fn queued_total(&self) -> usize {
        self.preload_fifo.len() + self.unload_fifo.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::{ChannelProfile, DeviceProfile, MainMemory};

    fn engine() -> PulEngine {
        PulEngine::new(FIFO_DEPTH, 65536)
    }

    fn mem() -> MainMemory {
        MainMemory::new(DeviceProfile::nvm(), ChannelProfile::system_default(), 1 << 24)
    }

    fn issue(engine: &mut PulEngine, mem: &mut MainMemory, dir: Direction, addr: u64, size: u32, now: SimTime) {
        let ticket = mem.submit(dir, addr, size as u64, now).unwrap();
        engine.enqueue(
            DmaRequest {
                direction: dir,
                main_addr: addr,
                pad_offset: 0,
                size_bytes: size,
                enqueued_at: now,
            },
            ticket,
            None,
        );
    }

    #[test]
    fn default_size_register_is_64() {
        assert_eq!(engine().size_register(), 64);
    }

    #[test]
    fn repeated_size_write_is_skipped() {
        let mut e = engine();
        assert!(e.set_transfer_size(64).is_ok());
        // 64 == default: no change, no write counted
        assert_eq!(e.register_write_count(), 0);
        assert!(e.set_transfer_size(128).unwrap());
        assert!(!e.set_transfer_size(128).unwrap());
        assert_eq!(e.register_write_count(), 1);
        assert!(e.set_transfer_size(64).unwrap());
        assert_eq!(e.register_write_count(), 2);
    }

    #[test]
    fn misaligned_size_rejected() {
        let mut e = engine();
        assert!(matches!(e.set_transfer_size(7), Err(PulError::InvalidTransferSize { .. })));
        assert!(matches!(e.set_transfer_size(65544), Err(PulError::InvalidTransferSize { .. })));
        assert!(matches!(e.set_transfer_size(0), Err(PulError::ZeroSizeTransfer)));
    }

    #[test]
    fn status_counts_track_completion() {
        let mut e = engine();
        let mut m = mem();
        assert_eq!(e.pending(QueueKind::Preloads, SimTime::ZERO), 0);
        assert_eq!(e.pending(QueueKind::Unloads, SimTime::ZERO), 0);
        for i in 0..3 {
            issue(&mut e, &mut m, Direction::Preload, i * 64, 64, SimTime::ZERO);
        }
        assert_eq!(e.pending(QueueKind::Preloads, SimTime::ZERO), 3);
        assert_eq!(e.pending(QueueKind::Unloads, SimTime::ZERO), 0);
        // After every completion has passed, counts observe zero.
        let late = SimTime::from_nanos(10_000);
        assert_eq!(e.pending(QueueKind::All, late), 0);
    }

    #[test]
    fn fifo_applies_back_pressure_at_depth_64() {
        let mut e = engine();
        let mut m = mem();
        for i in 0..FIFO_DEPTH as u64 {
            issue(&mut e, &mut m, Direction::Preload, i * 64, 64, SimTime::ZERO);
        }
        assert!(!e.can_enqueue(Direction::Preload, SimTime::ZERO));
        // The other queue is unaffected.
        assert!(e.can_enqueue(Direction::Unload, SimTime::ZERO));
        // A slot opens exactly when the oldest request completes.
        let free_at = e.next_slot_free(Direction::Preload, SimTime::ZERO).unwrap();
        assert_eq!(free_at.as_picos(), 350_000 + 7_451);
        assert!(e.can_enqueue(Direction::Preload, free_at));
    }

    #[test]
    fn waiting_on_preloads_ignores_unloads() {
        let mut e = engine();
        let mut m = mem();
        issue(&mut e, &mut m, Direction::Unload, 0, 64, SimTime::ZERO);
        // Preload queue empty: the wait condition holds immediately.
        assert_eq!(e.pending_drops_to(QueueKind::Preloads, 0), None);
        // Waiting on everything must include the unload.
        assert!(e.pending_drops_to(QueueKind::All, 0).is_some());
    }

    #[test]
    fn pending_drops_to_thresholds() {
        let mut e = engine();
        let mut m = mem();
        let mut completions = Vec::new();
        for i in 0..4 {
            issue(&mut e, &mut m, Direction::Preload, i * 64, 64, SimTime::ZERO);
        }
        for entry in e.preload_fifo.iter() {
            completions.push(entry.ticket.completion_time);
        }
        assert_eq!(e.pending_drops_to(QueueKind::Preloads, 0), Some(completions[3]));
        assert_eq!(e.pending_drops_to(QueueKind::Preloads, 2), Some(completions[1]));
        assert_eq!(e.pending_drops_to(QueueKind::Preloads, 4), None);
    }

    #[test]
    fn retire_clears_in_enqueue_order() {
        let mut e = engine();
        let mut m = mem();
        for i in 0..3 {
            issue(&mut e, &mut m, Direction::Preload, i * 64, 64, SimTime::ZERO);
        }
        let first_done = SimTime::from_picos(350_000 + 7_451);
        let r = e.retire_completed(first_done);
        assert_eq!(r.len(), 1);
        assert_eq!(e.pending(QueueKind::Preloads, first_done), 2);
        let all = e.retire_completed(SimTime::from_nanos(10_000));
        assert_eq!(all.len(), 2);
        assert_eq!(e.counters().retired_preloads, 3);
        assert_eq!(e.queued_total(), 0);
    }

    #[test]
    fn conservation_enqueued_equals_pending_plus_completed() {
        let mut e = engine();
        let mut m = mem();
        let mut now = SimTime::ZERO;
        for i in 0..40u64 {
            issue(&mut e, &mut m, Direction::Preload, (i % 16) * 4096, 64, now);
            now = now + SimTime::from_picos(9000);
            let enq = e.counters().enqueued_preloads as usize;
            let pending = e.pending(QueueKind::Preloads, now);
            let completed = enq - pending;
            assert_eq!(enq, completed + pending);
        }
    }
}
