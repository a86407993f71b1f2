//! Exact dyadic representation of reals in `[0, 1)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `2^128` as an `f64` (exact).
pub(crate) const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// A real number in `[0, 1)` stored as `numerator / 2^128`.
///
/// Arithmetic modulo one is ordinary wrapping arithmetic on the numerator, so
/// dilating by an integer and reducing mod 1 never rounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FixedPointReal(u128);

impl FixedPointReal {
    pub const ZERO: Self = Self(0);

    pub const fn from_numerator(numerator: u128) -> Self {
        Self(numerator)
    }

    pub const fn numerator(self) -> u128 {
        self.0
    }

    /// `num / den` truncated to 128 fractional bits. Requires `num < den`.
    pub fn from_ratio(num: u128, den: u128) -> Result<Self> {
        if den == 0 || num >= den {
            return Err(Error::Parse(format!("{num}/{den} is not in [0, 1)")));
        }
        // Long division, one bit at a time; den may use all 128 bits.
        let mut rem = num;
        let mut q: u128 = 0;
        for _ in 0..128 {
            let carry = rem >> 127;
            rem <<= 1;
            q <<= 1;
            if carry == 1 || rem >= den {
                rem = rem.wrapping_sub(den);
                q |= 1;
            }
        }
        Ok(Self(q))
    }

    /// Fractional part of `x`, truncated to 128 bits. Exact whenever the
    /// fractional part is at least `2^-75`.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "from_f64 requires a finite value");
        let frac = x - x.floor();
        if frac >= 1.0 {
            return Self(0);
        }
        Self((frac * TWO_POW_128) as u128)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_POW_128
    }

    /// `{self · k}`, computed exactly.
    #[inline]
    pub fn mul_int(self, k: i64) -> Self {
        // k as two's complement mod 2^128; the low 128 bits of the product
        // are exactly the numerator of the fractional part.
        Self(self.0.wrapping_mul(k as i128 as u128))
    }

    #[inline]
    pub fn wrapping_add(self, other: Self) -> Self {
        Self(self.0.wrapping_add(other.0))
    }

    #[inline]
    pub fn wrapping_sub(self, other: Self) -> Self {
        Self(self.0.wrapping_sub(other.0))
    }

    /// 32 lowercase hex digits, big-endian numerator.
    pub fn to_hex(self) -> String {
        format!("{:032x}", self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        if s.len() != 32 || !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(Error::Parse(format!(
                "expected 32 lowercase hex digits, got {s:?}"
            )));
        }
        u128::from_str_radix(s, 16)
            .map(Self)
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for FixedPointReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for FixedPointReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_hex(s)
    }
}

/// Length of an arc on the circle `[0, 1)` as a 129-bit quantity: `None`
/// stands for the whole circle.
pub(crate) fn arc_numerator(len: f64) -> Option<u128> {
    if len >= 1.0 {
        None
    } else {
        Some((len * TWO_POW_128) as u128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_times_integers() {
        let q = FixedPointReal::from_numerator(1 << 126);
        assert_eq!(q.to_f64(), 0.25);
        assert_eq!(q.mul_int(4), FixedPointReal::ZERO);
        assert_eq!(q.mul_int(3).to_f64(), 0.75);
        assert_eq!(q.mul_int(-1).to_f64(), 0.75);
    }

    #[test]
    fn third_keeps_truncation_error() {
        let third = FixedPointReal::from_ratio(1, 3).unwrap();
        assert_eq!(third.numerator(), u128::MAX / 3);
        // 3 * floor(2^128 / 3) = 2^128 - 1, i.e. 1 - 2^-128.
        assert_eq!(third.mul_int(3).numerator(), u128::MAX);
    }

    #[test]
    fn hex_round_trip_and_rejects_bad_input() {
        let x = FixedPointReal::from_numerator(0x0123_4567_89ab_cdef_0011_2233_4455_6677);
        let s = x.to_hex();
        assert_eq!(s, "0123456789abcdef0011223344556677");
        assert_eq!(s.parse::<FixedPointReal>().unwrap(), x);
        assert!(FixedPointReal::from_hex("0123").is_err());
        assert!(FixedPointReal::from_hex("0123456789ABCDEF0011223344556677").is_err());
    }

    #[test]
    fn from_f64_is_exact_for_dyadics() {
        assert_eq!(FixedPointReal::from_f64(0.5).numerator(), 1 << 127);
        assert_eq!(FixedPointReal::from_f64(-0.25).to_f64(), 0.75);
        assert_eq!(FixedPointReal::from_f64(3.0), FixedPointReal::ZERO);
    }

    #[test]
    fn ratio_matches_f64_on_simple_fractions() {
        let x = FixedPointReal::from_ratio(5, 8).unwrap();
        assert_eq!(x.to_f64(), 0.625);
        assert!(FixedPointReal::from_ratio(3, 3).is_err());
    }
}
