//! Numeric backends.
//!
//! Every algorithm in the crate is generic over [`Scalar`]. Two backends are
//! provided: [`Rational`] (arbitrary precision, every comparison exact) and
//! `f64` (binary64 with a relative guard band of [`GUARD_BAND`]). Comparisons
//! against a threshold go through [`strictly_less`], which returns
//! [`Decision::Uncertain`] when a binary64 comparison lands inside the guard
//! band.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Relative guard band used by the binary64 backend.
pub const GUARD_BAND: f64 = 1e-10;

/// Absolute merge tolerance for interval unions in binary64 mode.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Three-valued outcome of a guarded comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
    Uncertain,
}

impl Decision {
    pub fn is_yes(self) -> bool {
        self == Decision::Yes
    }

    /// Conjunction; `No` dominates, then `Uncertain`.
    pub fn and(self, other: Decision) -> Decision {
        match (self, other) {
            (Decision::No, _) | (_, Decision::No) => Decision::No,
            (Decision::Uncertain, _) | (_, Decision::Uncertain) => Decision::Uncertain,
            _ => Decision::Yes,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Yes => "true",
            Decision::No => "false",
            Decision::Uncertain => "uncertain",
        })
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
    /// Exact conversion of a finite binary64 value.
    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn parse(text: &str) -> Result<Self>;
    /// Decimal string when finite, `p/q` otherwise (rationals), shortest
    /// round-trip repr for binary64.
    fn to_decimal(&self) -> String;
    /// Absolute guard band applicable when comparing `self` with a value of
    /// similar magnitude. Zero for exact backends.
    fn guard(&self) -> Self;
    fn merge_tolerance() -> Self;
    /// Clamp into `[0, 1]` after evaluation. Exact backends never need it.
    fn clamp_unit(self) -> Self {
        self
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
    fn half(&self) -> Self {
        self.clone() / Self::from_i64(2)
    }
    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

/// Guarded `a < b`.
pub fn strictly_less<S: Scalar>(a: &S, b: &S) -> Decision {
    if S::EXACT {
        return if a < b { Decision::Yes } else { Decision::No };
    }
    let g = S::max_of(a.guard(), b.guard());
    if a.clone() + g.clone() < *b {
        Decision::Yes
    } else if *a > b.clone() + g {
        Decision::No
    } else {
        Decision::Uncertain
    }
}

/// Guarded equality: `Yes` when exactly equal (exact) or within the guard band
/// (binary64).
pub fn approx_eq<S: Scalar>(a: &S, b: &S) -> bool {
    let g = S::max_of(a.guard(), b.guard());
    (a.clone() - b.clone()).abs() <= g
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| Error::Parse(text.to_string()))?;
            let d: f64 = d.trim().parse().map_err(|_| Error::Parse(text.to_string()))?;
            if d == 0.0 {
                return Err(Error::Parse(text.to_string()));
            }
            return Ok(n / d);
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse(text.to_string()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parse(text.to_string()))
        }
    }
    fn to_decimal(&self) -> String {
        format!("{self:?}")
    }
    fn guard(&self) -> Self {
        GUARD_BAND * f64::abs(*self).max(1.0)
    }
    fn merge_tolerance() -> Self {
        MERGE_TOLERANCE
    }
    fn clamp_unit(self) -> Self {
        self.clamp(0.0, 1.0)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn parse(text: &str) -> Result<Self> {
        parse_rational(text).ok_or_else(|| Error::Parse(text.to_string()))
    }
    fn to_decimal(&self) -> String {
        rational_to_decimal(self)
    }
    fn guard(&self) -> Self {
        Zero::zero()
    }
    fn merge_tolerance() -> Self {
        Zero::zero()
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn powi(&self, n: u32) -> Self {
        num_traits::pow(self.clone(), n as usize)
    }
}

/// Parses `12`, `-0.125`, `1e-3`, `2.5E+2` or `3/7` exactly.
fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

fn rational_to_decimal(value: &Rational) -> String {
    let mut den = value.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while den.is_multiple_of(&two) {
        den /= &two;
        twos += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    if places == 0 {
        return value.numer().to_string();
    }
    let scaled = value * BigRational::from_integer(num_traits::pow(BigInt::from(10u32), places));
    let int = scaled.to_integer();
    let negative = int.is_negative();
    let mut digits = int.abs().to_string();
    if digits.len() <= places {
        digits = format!("{}{}", "0".repeat(places + 1 - digits.len()), digits);
    }
    let split = digits.len() - places;
    let body = format!("{}.{}", &digits[..split], &digits[split..]);
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str) -> Rational {
        Rational::parse(text).unwrap()
    }

    #[test]
    fn parses_decimal_forms_exactly() {
        assert_eq!(q("0.1"), Rational::ratio(1, 10));
        assert_eq!(q("-2.5E+2"), Rational::from_i64(-250));
        assert_eq!(q("1e-3"), Rational::ratio(1, 1000));
        assert_eq!(q("3/7"), Rational::ratio(3, 7));
        assert_eq!(q(".5"), Rational::ratio(1, 2));
        assert!(Rational::parse("abc").is_err());
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rational::ratio(1, 8).to_decimal(), "0.125");
        assert_eq!(Rational::ratio(-3, 40).to_decimal(), "-0.075");
        assert_eq!(Rational::ratio(1, 3).to_decimal(), "1/3");
        assert_eq!(Rational::from_i64(7).to_decimal(), "7");
        assert_eq!(0.12f64.to_decimal(), "0.12");
    }

    #[test]
    fn guarded_comparisons() {
        assert_eq!(strictly_less(&0.1f64, &0.2), Decision::Yes);
        assert_eq!(strictly_less(&0.2f64, &0.1), Decision::No);
        assert_eq!(strictly_less(&0.1f64, &(0.1 + 1e-12)), Decision::Uncertain);
        assert_eq!(strictly_less(&q("0.1"), &q("0.1")), Decision::No);
        assert_eq!(strictly_less(&q("0.1"), &q("0.1000000000000001")), Decision::Yes);
    }

    proptest::proptest! {
        #[test]
        fn decimal_round_trip(n in -1_000_000i64..1_000_000, k in 0u32..6, d in 1i64..400) {
            let v = Rational::ratio(n, d * 10i64.pow(k));
            proptest::prop_assert_eq!(Rational::parse(&v.to_decimal()).unwrap(), v);
        }
    }
}
