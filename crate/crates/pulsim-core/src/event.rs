//! Discrete-event queue.
//!
//! Events are dispatched in `(fire_at, seq)` order where `seq` is the
//! insertion sequence number, so two runs that schedule the same events in
//! the same order dispatch them identically. A configurable cap on dispatched
//! events turns a livelocked model into an error instead of a hang.

use alloc::collections::{BTreeSet, BinaryHeap};
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::time::SimTime;

pub const DEFAULT_EVENT_LIMIT: u64 = 1_000_000_000;

/// Handle returned by [`EventQueue::schedule`], usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventHandle(u64);

impl EventHandle {
    pub fn seq(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleError {
    /// `fire_at` is earlier than the current clock.
    SchedulingInPast { fire_at: SimTime, now: SimTime },
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::SchedulingInPast { fire_at, now } => {
                write!(f, "cannot schedule event at {fire_at} ns: clock is at {now} ns")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunError {
    /// More events were dispatched than the configured cap; the model is
    /// almost certainly rescheduling itself forever.
    EventLimitExceeded { limit: u64 },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::EventLimitExceeded { limit } => {
                write!(f, "dispatched more than {limit} events; model appears livelocked")
            }
        }
    }
}

/// An event popped from the queue, handed to the dispatch callback.
#[derive(Debug)]
pub struct Dispatched<P> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub payload: P,
}

struct Entry<P> {
    fire_at: SimTime,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}
impl<P> Eq for Entry<P> {}
impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<P> Ord for Entry<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.fire_at, self.seq).cmp(&(other.fire_at, other.seq))
    }
}

pub struct EventQueue<P> {
    heap: BinaryHeap<Reverse<Entry<P>>>,
    cancelled: BTreeSet<u64>,
    clock: SimTime,
    next_seq: u64,
    dispatched: u64,
    event_limit: u64,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        Self::with_event_limit(DEFAULT_EVENT_LIMIT)
    }

    pub fn with_event_limit(event_limit: u64) -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            cancelled: BTreeSet::new(),
            clock: SimTime::ZERO,
            next_seq: 1,
            dispatched: 0,
            event_limit,
        }
    }

    pub fn now(&self) -> SimTime {
        self.clock
    }

    /// Number of live (not cancelled) queued events.
    pub fn depth(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn schedule(&mut self, fire_at: SimTime, payload: P) -> Result<EventHandle, ScheduleError> {
        if fire_at < self.clock {
            return Err(ScheduleError::SchedulingInPast {
                fire_at,
                now: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry {
            fire_at,
            seq,
            payload,
        }));
        Ok(EventHandle(seq))
    }

    /// Cancels a queued event. Returns false if it already fired or was
    /// already cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_seq {
            return false;
        }
        let live = self
            .heap
            .iter()
            .any(|Reverse(e)| e.seq == handle.0 && !self.cancelled.contains(&e.seq));
        if live {
            self.cancelled.insert(handle.0);
        }
        live
    }

    /// Pops the next live event and advances the clock to it.
    pub fn pop_next(&mut self) -> Option<Dispatched<P>> {
        while let Some(Reverse(entry)) = self.heap.pop() {
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            debug_assert!(entry.fire_at >= self.clock, "clock monotonicity violated");
            self.clock = entry.fire_at;
            self.dispatched += 1;
            return Some(Dispatched {
                fire_at: entry.fire_at,
                seq: entry.seq,
                payload: entry.payload,
            });
        }
        None
    }

    /// Dispatches every event in `(fire_at, seq)` order until the queue is
    /// empty, returning the final clock value.
    pub fn run_until_idle<C, F>(&mut self, ctx: &mut C, mut handler: F) -> Result<SimTime, RunError>
    where
        F: FnMut(&mut Self, &mut C, Dispatched<P>),
    {
        while let Some(ev) = self.pop_next() {
            if self.dispatched > self.event_limit {
                return Err(RunError::EventLimitExceeded {
                    limit: self.event_limit,
                });
            }
            handler(self, ctx, ev);
        }
        Ok(self.clock)
    }
}
