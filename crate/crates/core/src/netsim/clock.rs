use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// Simulated time in nanoseconds since the start of a run.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_secs_f64(s: f64) -> Self {
        SimTime((s * 1e9).round().max(0.0) as u64)
    }

    pub fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    pub fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    /// Whole milliseconds, truncated.
    pub fn as_millis(self) -> u64 {
        self.0 / 1_000_000
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Debug for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}s", self.as_secs_f64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    #[default]
    Virtual,
    Realtime,
}

/// Monotone simulation clock. In virtual mode it only moves when the
/// scheduler hands it the next event's due time.
#[derive(Debug, Clone)]
pub struct VirtualClock {
    now: SimTime,
    mode: ClockMode,
}

impl VirtualClock {
    pub fn new(mode: ClockMode) -> Self {
        Self { now: SimTime::ZERO, mode }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn mode(&self) -> ClockMode {
        self.mode
    }

    /// Moves the clock forward to `t`; earlier instants are ignored.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(SimTime::from_secs_f64(1.33).as_nanos(), 1_330_000_000);
        assert_eq!(SimTime::from_millis(5740), SimTime::from_secs_f64(5.74));
        assert_eq!(SimTime(1_999_999).as_millis(), 1);
    }

    #[test]
    fn clock_never_goes_back() {
        let mut c = VirtualClock::new(ClockMode::Virtual);
        c.advance_to(SimTime(10));
        c.advance_to(SimTime(5));
        assert_eq!(c.now(), SimTime(10));
    }
}
