//! Core simulation engine for software-managed preload/unload (PUL) studies
//! on near-data (NDP) and processing-in-memory (PIM) hardware.
//!
//! The crate is `no_std` + `alloc`: a simulation instance is a self-contained
//! value with no global state, so an experiment runner can evaluate many
//! instances in parallel. All timing is integer picoseconds internally;
//! public interfaces speak nanoseconds.
//!
//! Module map:
//! - [`time`]: picosecond clock and per-PE cycle grids
//! - [`event`]: the discrete-event queue (total order, livelock cap)
//! - [`memory`]: main-memory devices behind a shared bandwidth channel
//! - [`scratchpad`]: PE-local explicitly managed buffer with hazard tracking
//! - [`pul`]: the DMA engine (bounded FIFOs, size register, status polling)
//! - [`pe`]: in-order PE models (NDP soft core, PIM tasklet scheduler)
//! - [`kernel`]: workload generators (SUM, aggregation, filter, flush)
//! - [`sim`]: wires PEs + engines + memory into a runnable instance
//! - [`analysis`]: roofline, speedup, saturation metrics
//! - [`config`]: run configuration and sweep expansion

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod config;
pub mod event;
pub mod kernel;
pub mod memory;
pub mod pe;
pub mod pul;
pub mod scratchpad;
pub mod sim;
pub mod time;

pub use analysis::{MetricsReport, RooflineBound, RooflinePoint};
pub use config::{DeviceKind, KernelConfig, Mode, PeProfileKind, RunConfig};
pub use event::{EventHandle, EventQueue, RunError, ScheduleError};
pub use memory::{ChannelProfile, DeviceProfile, MainMemory, TransferTicket};
pub use pe::{PeProfile, PeStats};
pub use pul::{Direction, DmaRequest, PulEngine, QueueKind};
pub use scratchpad::Scratchpad;
pub use sim::{RunReport, SimError, Simulation};
pub use time::{CyclePeriod, SimTime};
