//! Integer nanosecond time arithmetic.
//!
//! Every schedule quantity (offset, span, period, delay) is an exact number
//! of nanoseconds. There is no floating-point time anywhere in the model or
//! the simulator: the default mini-slot of 62,500 ns and all table periods
//! are representable exactly, and equality checks on delays are meaningful.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::CoreError;

/// A point in time or a duration, in nanoseconds.
///
/// Signed so that clock offsets between the 5G and TSN domains can be
/// represented; schedule quantities are validated non-negative where the
/// model requires it.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TimeNs(pub i64);

impl TimeNs {
    pub const ZERO: TimeNs = TimeNs(0);

    pub fn ns(self) -> i64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl fmt::Display for TimeNs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

impl Add for TimeNs {
    type Output = TimeNs;
    fn add(self, rhs: TimeNs) -> TimeNs {
        TimeNs(self.0 + rhs.0)
    }
}

impl AddAssign for TimeNs {
    fn add_assign(&mut self, rhs: TimeNs) {
        self.0 += rhs.0;
    }
}

impl Sub for TimeNs {
    type Output = TimeNs;
    fn sub(self, rhs: TimeNs) -> TimeNs {
        TimeNs(self.0 - rhs.0)
    }
}

impl SubAssign for TimeNs {
    fn sub_assign(&mut self, rhs: TimeNs) {
        self.0 -= rhs.0;
    }
}

impl Mul<i64> for TimeNs {
    type Output = TimeNs;
    fn mul(self, rhs: i64) -> TimeNs {
        TimeNs(self.0 * rhs)
    }
}

impl Neg for TimeNs {
    type Output = TimeNs;
    fn neg(self) -> TimeNs {
        TimeNs(-self.0)
    }
}

/// Largest hyper-period the model accepts. LCMs beyond this reject the
/// scenario instead of silently wrapping.
pub const MAX_HYPER_NS: i64 = 1 << 62;

/// Least common multiple of a set of periods.
///
/// The schedule repeats with this period; overflow past 2^62 ns is reported
/// as an error rather than computed modulo 2^64.
pub fn hyper_period(periods: &[TimeNs]) -> Result<TimeNs, CoreError> {
    if periods.is_empty() {
        return Err(CoreError::Validation("hyper period of empty set".into()));
    }
    let mut acc: i64 = 1;
    for p in periods {
        if p.0 <= 0 {
            return Err(CoreError::Validation(format!(
                "hyper period requires positive periods, got {}",
                p
            )));
        }
        let g = acc.gcd(&p.0);
        acc = match (acc / g).checked_mul(p.0) {
            Some(v) if v <= MAX_HYPER_NS => v,
            _ => {
                return Err(CoreError::Validation(format!(
                    "hyper period overflow: lcm exceeds {} ns",
                    MAX_HYPER_NS
                )))
            }
        };
    }
    Ok(TimeNs(acc))
}

/// Transmission duration of `length_bytes` on a link of `rate_bits_per_sec`,
/// rounded up to the next nanosecond so reserved windows never undercount.
pub fn wire_span(length_bytes: i64, rate_bits_per_sec: i64) -> Result<TimeNs, CoreError> {
    if length_bytes <= 0 {
        return Err(CoreError::Validation(format!(
            "frame length must be positive, got {} bytes",
            length_bytes
        )));
    }
    if rate_bits_per_sec <= 0 {
        return Err(CoreError::Validation(format!(
            "link rate must be positive, got {} bit/s",
            rate_bits_per_sec
        )));
    }
    let bits = (length_bytes as i128) * 8 * 1_000_000_000;
    let rate = rate_bits_per_sec as i128;
    let span = (bits + rate - 1) / rate;
    Ok(TimeNs(span as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hyper_period_of_table_periods() {
        // 0.5ms, 1ms, 2ms
        let periods = [TimeNs(500_000), TimeNs(1_000_000), TimeNs(2_000_000)];
        assert_eq!(hyper_period(&periods).unwrap(), TimeNs(2_000_000));
    }

    #[test]
    fn hyper_period_singleton() {
        assert_eq!(
            hyper_period(&[TimeNs(100_000)]).unwrap(),
            TimeNs(100_000)
        );
    }

    #[test]
    fn hyper_period_coprime_factors() {
        // 300us, 400us -> 1200us
        assert_eq!(
            hyper_period(&[TimeNs(300_000), TimeNs(400_000)]).unwrap(),
            TimeNs(1_200_000)
        );
    }

    #[test]
    fn hyper_period_overflow_rejected() {
        let primes = [
            TimeNs(1_000_000_007),
            TimeNs(1_000_000_009),
            TimeNs(1_000_000_021),
        ];
        assert!(hyper_period(&primes).is_err());
    }

    #[test]
    fn hyper_period_rejects_nonpositive() {
        assert!(hyper_period(&[TimeNs(0)]).is_err());
        assert!(hyper_period(&[TimeNs(-5)]).is_err());
    }

    #[test]
    fn wire_span_rounds_up() {
        // 96 B at 100 Mbit/s = 7680 ns exactly
        assert_eq!(wire_span(96, 100_000_000).unwrap(), TimeNs(7_680));
        // 1 B at 3 Gbit/s = 2.66.. ns, rounds to 3
        assert_eq!(wire_span(1, 3_000_000_000).unwrap(), TimeNs(3));
    }

    #[test]
    fn wire_span_rejects_zero_length() {
        assert!(wire_span(0, 100_000_000).is_err());
    }

    proptest! {
        #[test]
        fn hyper_period_divides_all(periods in prop::collection::vec(1i64..5_000, 1..5)) {
            let ts: Vec<TimeNs> = periods.iter().map(|&p| TimeNs(p)).collect();
            let h = hyper_period(&ts).unwrap();
            for p in &ts {
                prop_assert_eq!(h.0 % p.0, 0);
            }
        }

        #[test]
        fn hyper_period_order_invariant(periods in prop::collection::vec(1i64..5_000, 1..5)) {
            let fwd: Vec<TimeNs> = periods.iter().map(|&p| TimeNs(p)).collect();
            let mut rev = fwd.clone();
            rev.reverse();
            prop_assert_eq!(hyper_period(&fwd).unwrap(), hyper_period(&rev).unwrap());
        }
    }
}
