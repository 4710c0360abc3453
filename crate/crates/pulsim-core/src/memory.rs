//! Main-memory model: a device latency profile behind a shared channel with
//! finite bandwidth.
//!
//! The core modeling assumption, used everywhere: the device latency phases
//! of distinct outstanding requests may overlap freely, while the transfer
//! phases serialize on the channel in arrival order. For a request submitted
//! at `now`:
//!
//! ```text
//! ready      = now + device latency (read or write)
//! start      = max(ready, channel_free)      // channel claimed in arrival order
//! completion = start + size / bandwidth
//! ```
//!
//! This is the simplest model that reproduces both latency hiding through
//! deep request queues and bandwidth saturation under large transfers or
//! many PEs. NVM is the same device with different latencies (the emulated
//! NVM approach: altered read/write latencies over conventional DRAM).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::pul::Direction;
use crate::time::SimTime;

/// Read/write latency of one memory technology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceProfile {
    pub read_latency_ns: u64,
    pub write_latency_ns: u64,
    pub label: String,
}

impl DeviceProfile {
    pub fn new(read_latency_ns: u64, write_latency_ns: u64, label: &str) -> Self {
        assert!(read_latency_ns > 0 && write_latency_ns > 0, "latencies must be positive");
        DeviceProfile {
            read_latency_ns,
            write_latency_ns,
            label: String::from(label),
        }
    }

    /// Emulated NVM timings (350 ns read, 170 ns write).
    pub fn nvm() -> Self {
        Self::new(350, 170, "nvm")
    }

    /// DRAM defaults. The read figure is derived from the 3.5x access-latency
    /// gap to the 350 ns NVM read; both values are config-overridable.
    pub fn dram() -> Self {
        Self::new(100, 100, "dram")
    }

    pub fn latency(&self, direction: Direction) -> SimTime {
        match direction {
            Direction::Preload => SimTime::from_nanos(self.read_latency_ns),
            Direction::Unload => SimTime::from_nanos(self.write_latency_ns),
        }
    }
}

/// Shared channel between all PEs and main memory. Reads and writes share
/// the one bandwidth figure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelProfile {
    pub bandwidth_bytes_per_sec: u64,
    pub label: String,
}

impl ChannelProfile {
    pub fn new(bandwidth_bytes_per_sec: u64, label: &str) -> Self {
        assert!(bandwidth_bytes_per_sec > 0, "bandwidth must be positive");
        ChannelProfile {
            bandwidth_bytes_per_sec,
            label: String::from(label),
        }
    }

    /// The 8 GiB/s system cap.
    pub fn system_default() -> Self {
        Self::new(8 * (1 << 30), "8GiB/s")
    }

    /// Serialized transfer time for `bytes` on this channel, rounded up to
    /// whole picoseconds.
    pub fn transfer_time(&self, bytes: u64) -> SimTime {
        let ps = (bytes as u128 * 1_000_000_000_000u128).div_ceil(self.bandwidth_bytes_per_sec as u128);
        SimTime::from_picos(ps as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryError {
    ZeroSizeTransfer,
    AddressOutOfRange { addr: u64, size: u64, region: u64 },
}

impl fmt::Display for MemoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemoryError::ZeroSizeTransfer => write!(f, "zero-size transfer"),
            MemoryError::AddressOutOfRange { addr, size, region } => write!(
                f,
                "transfer [{addr}, {addr}+{size}) outside main-memory region of {region} bytes"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThroughputError {
    EmptyWindow,
}

impl fmt::Display for ThroughputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "throughput window is empty")
    }
}

/// Resolved timing of one DMA transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransferTicket {
    pub request_id: u64,
    pub direction: Direction,
    pub bytes: u64,
    pub issue_time: SimTime,
    /// End of the device latency phase.
    pub ready_at: SimTime,
    /// Moment the transfer phase claims the channel.
    pub transfer_start: SimTime,
    pub completion_time: SimTime,
}

impl TransferTicket {
    /// Time spent waiting for the channel after the device latency elapsed.
    pub fn queued_channel_wait(&self) -> SimTime {
        self.transfer_start - self.ready_at
    }
}

struct TransferPhase {
    start: SimTime,
    end: SimTime,
    bytes: u64,
}

/// One main-memory instance: device + channel + (optionally) contents.
pub struct MainMemory {
    pub device: DeviceProfile,
    pub channel: ChannelProfile,
    region_bytes: u64,
    channel_free: SimTime,
    phases: Vec<TransferPhase>,
    contents: Option<Vec<u8>>,
    next_request_id: u64,
    bytes_read: u64,
    bytes_written: u64,
}

impl MainMemory {
    pub fn new(device: DeviceProfile, channel: ChannelProfile, region_bytes: u64) -> Self {
        MainMemory {
            device,
            channel,
            region_bytes,
            channel_free: SimTime::ZERO,
            phases: Vec::new(),
            contents: None,
            next_request_id: 1,
            bytes_read: 0,
            bytes_written: 0,
        }
    }

    pub fn region_bytes(&self) -> u64 {
        self.region_bytes
    }

    /// Switches to value-checking mode, materializing the region and filling
    /// each aligned 8-byte word from `word_at(byte_address)`.
    pub fn materialize<F: Fn(u64) -> u64>(&mut self, word_at: F) {
        let mut data = alloc::vec![0u8; self.region_bytes as usize];
        for w in 0..(self.region_bytes / 8) {
            let addr = w * 8;
            data[addr as usize..addr as usize + 8].copy_from_slice(&word_at(addr).to_le_bytes());
        }
        self.contents = Some(data);
    }

    pub fn is_materialized(&self) -> bool {
        self.contents.is_some()
    }

    pub fn read_bytes(&self, addr: u64, len: usize) -> Option<&[u8]> {
        self.contents
            .as_ref()
            .map(|c| &c[addr as usize..addr as usize + len])
    }

    pub fn write_bytes(&mut self, addr: u64, data: &[u8]) {
        if let Some(c) = self.contents.as_mut() {
            c[addr as usize..addr as usize + data.len()].copy_from_slice(data);
        }
    }

    /// Submits one asynchronous transfer, resolving its full timing now.
    /// The latency phase overlaps other requests; the transfer phase claims
    /// the channel in arrival order (FIFO arbitration across all PEs).
    pub fn submit(
        &mut self,
        direction: Direction,
        main_addr: u64,
        size_bytes: u64,
        now: SimTime,
    ) -> Result<TransferTicket, MemoryError> {
        if size_bytes == 0 {
            return Err(MemoryError::ZeroSizeTransfer);
        }
        if main_addr.checked_add(size_bytes).is_none_or(|end| end > self.region_bytes) {
            return Err(MemoryError::AddressOutOfRange {
                addr: main_addr,
                size: size_bytes,
                region: self.region_bytes,
            });
        }
        let ready_at = now + self.device.latency(direction);
        let transfer_start = ready_at.max(self.channel_free);
        let completion_time = transfer_start + self.channel.transfer_time(size_bytes);
        self.channel_free = completion_time;
        self.phases.push(TransferPhase {
            start: transfer_start,
            end: completion_time,
            bytes: size_bytes,
        });
        match direction {
            Direction::Preload => self.bytes_read += size_bytes,
            Direction::Unload => self.bytes_written += size_bytes,
        }
        let request_id = self.next_request_id;
        self.next_request_id += 1;
        Ok(TransferTicket {
            request_id,
            direction,
            bytes: size_bytes,
            issue_time: now,
            ready_at,
            transfer_start,
            completion_time,
        })
    }

    pub fn bytes_read(&self) -> u64 {
        self.bytes_read
    }

    pub fn bytes_written(&self) -> u64 {
        self.bytes_written
    }

    /// Bytes per second moved during `[from, to)`, pro-rating transfers that
    /// partially overlap the window. Never exceeds the channel bandwidth.
    pub fn observed_throughput(&self, from: SimTime, to: SimTime) -> Result<f64, ThroughputError> {
        if to <= from {
            return Err(ThroughputError::EmptyWindow);
        }
        let mut bytes = 0.0f64;
        for p in &self.phases {
            let lo = p.start.max(from);
            let hi = p.end.min(to);
            if hi > lo {
                let overlap = (hi - lo).as_picos() as f64;
                let dur = (p.end - p.start).as_picos() as f64;
                bytes += p.bytes as f64 * (overlap / dur);
            }
        }
        let window_sec = (to - from).as_picos() as f64 / 1e12;
        Ok(bytes / window_sec)
    }
}
