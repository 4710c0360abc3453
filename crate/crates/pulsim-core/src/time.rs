//! Simulation time.
//!
//! The global clock counts integer picoseconds. Nanoseconds are too coarse:
//! a 150 MHz cycle is 6666.67 ns/1000 and mixing 150 MHz and 350 MHz PEs with
//! ns-denominated memory latencies would drift under per-event rounding.
//! Cycle durations are rounded once, to the nearest picosecond, and every
//! boundary is an exact multiple from there.

use core::fmt;
use core::ops::{Add, AddAssign, Sub};

pub const PICOS_PER_NANO: u64 = 1_000;

/// A point on the simulation timeline, in picoseconds since start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime {
    picos: u64,
}

impl SimTime {
    pub const ZERO: SimTime = SimTime { picos: 0 };

    pub const fn from_picos(picos: u64) -> Self {
        SimTime { picos }
    }

    pub const fn from_nanos(nanos: u64) -> Self {
        SimTime {
            picos: nanos * PICOS_PER_NANO,
        }
    }

    pub const fn as_picos(self) -> u64 {
        self.picos
    }

    /// Whole nanoseconds (truncated).
    pub const fn as_nanos(self) -> u64 {
        self.picos / PICOS_PER_NANO
    }

    pub fn as_nanos_f64(self) -> f64 {
        self.picos as f64 / PICOS_PER_NANO as f64
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime {
            picos: self.picos.saturating_sub(rhs.picos),
        }
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime {
            picos: self.picos + rhs.picos,
        }
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.picos += rhs.picos;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime {
            picos: self.picos - rhs.picos,
        }
    }
}

impl fmt::Display for SimTime {
    /// Renders as nanoseconds with a fixed three-digit fraction, e.g. `357.451`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{:03}",
            self.picos / PICOS_PER_NANO,
            self.picos % PICOS_PER_NANO
        )
    }
}

/// The fixed cycle duration of one PE clock, in picoseconds.
///
/// A cycle at `f` MHz lasts `10^6 / f` ps, rounded to the nearest picosecond
/// (150 MHz -> 6667 ps, 350 MHz -> 2857 ps).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclePeriod {
    picos: u64,
}

impl CyclePeriod {
    pub fn from_freq_mhz(freq_mhz: u32) -> Self {
        assert!(freq_mhz > 0, "PE frequency must be positive");
        let f = freq_mhz as u64;
        CyclePeriod {
            picos: (1_000_000 + f / 2) / f,
        }
    }

    pub const fn as_picos(self) -> u64 {
        self.picos
    }

    /// Absolute time of the boundary between cycle `cycle - 1` and `cycle`.
    /// Cycle `k` spans `[k*T, (k+1)*T)`.
    pub fn boundary(self, cycle: u64) -> SimTime {
        SimTime::from_picos(cycle * self.picos)
    }

    /// Smallest cycle count `k` such that `boundary(k) >= t`.
    pub fn cycles_to_reach(self, t: SimTime) -> u64 {
        t.as_picos().div_ceil(self.picos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_periods_round_to_picos() {
        assert_eq!(CyclePeriod::from_freq_mhz(150).as_picos(), 6667);
        assert_eq!(CyclePeriod::from_freq_mhz(350).as_picos(), 2857);
        assert_eq!(CyclePeriod::from_freq_mhz(1000).as_picos(), 1000);
    }

    #[test]
    fn boundary_and_cover() {
        let t = CyclePeriod::from_freq_mhz(150);
        assert_eq!(t.boundary(0), SimTime::ZERO);
        assert_eq!(t.boundary(3).as_picos(), 20001);
        // 357451 ps / 6667 ps = 53.6 -> first boundary at or after is cycle 54
        assert_eq!(t.cycles_to_reach(SimTime::from_picos(357_451)), 54);
        assert_eq!(t.cycles_to_reach(SimTime::ZERO), 0);
        assert_eq!(t.cycles_to_reach(SimTime::from_picos(6667)), 1);
        assert_eq!(t.cycles_to_reach(SimTime::from_picos(6668)), 2);
    }

    #[test]
    fn display_is_fixed_point_nanos() {
        assert_eq!(SimTime::from_picos(357_451).to_string(), "357.451");
        assert_eq!(SimTime::from_nanos(5).to_string(), "5.000");
        assert_eq!(SimTime::from_picos(7).to_string(), "0.007");
    }
}
