use std::ops::Add;

/// Instant on the simulation clock, in whole microseconds since start.
///
/// The engine does all time arithmetic on integers. Trace files carry decimal
/// milliseconds with at most three fractional digits, so they convert to
/// microseconds without rounding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1000)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Microseconds elapsed since `earlier`; zero if `earlier` is not earlier.
    pub fn since(self, earlier: SimTime) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;

    fn add(self, duration_us: u64) -> SimTime {
        SimTime(self.0 + duration_us)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn millis_convert_exactly() {
        assert_eq!(SimTime::from_millis(5).as_micros(), 5000);
        assert_eq!(SimTime::from_micros(123_456).as_millis_f64(), 123.456);
    }

    #[test]
    fn since_saturates() {
        let early = SimTime::from_micros(100);
        let late = SimTime::from_micros(250);
        assert_eq!(late.since(early), 150);
        assert_eq!(early.since(late), 0);
        assert_eq!(early.since(early), 0);
    }

    #[test]
    fn add_advances() {
        assert_eq!(SimTime::ZERO + 42, SimTime::from_micros(42));
    }
}
