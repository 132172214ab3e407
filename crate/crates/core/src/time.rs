//! Exact non-negative rational time values.
//!
//! All time quantities in the crate are [`TimeValue`]s. Arithmetic is exact
//! (arbitrary precision numerator and denominator), so bound checks such as
//! `makespan <= W/M + (1 - 1/M) len(G)` are decided without tolerances.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A non-negative exact rational number of time units.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimeValue(BigRational);

impl TimeValue {
    pub fn zero() -> Self {
        TimeValue(BigRational::zero())
    }

    pub fn from_integer(n: u64) -> Self {
        TimeValue(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`. Fails on a zero denominator or a negative value.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(r: BigRational) -> Result<Self, Error> {
        if r.is_negative() {
            return Err(Error::Parse(format!("negative time value {r}")));
        }
        Ok(TimeValue(r))
    }

    /// Shorthand used throughout tests and fixtures. Panics on bad input.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_ratio(num, den).expect("valid non-negative ratio")
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// `self - other`, or `None` if the result would be negative.
    pub fn checked_sub(&self, other: &TimeValue) -> Option<TimeValue> {
        if other.0 > self.0 {
            None
        } else {
            Some(TimeValue(&self.0 - &other.0))
        }
    }

    /// `max(self - other, 0)`.
    pub fn saturating_sub(&self, other: &TimeValue) -> TimeValue {
        self.checked_sub(other).unwrap_or_default()
    }

    /// Multiplication by a non-negative rational factor.
    pub fn scale(&self, factor: &BigRational) -> TimeValue {
        assert!(!factor.is_negative(), "negative time scale factor");
        TimeValue(&self.0 * factor)
    }

    /// Division by a positive integer (e.g. a processor count).
    pub fn div_int(&self, n: usize) -> TimeValue {
        assert!(n > 0, "division by zero");
        TimeValue(&self.0 / BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact ratio `self / other` (`other` must be positive).
    pub fn ratio_to(&self, other: &TimeValue) -> BigRational {
        assert!(other.is_positive(), "ratio against a zero time value");
        &self.0 / &other.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer count of `1/den` units if the value is an exact multiple of it.
    pub fn to_units(&self, den: u64) -> Option<u64> {
        let scaled = &self.0 * BigRational::from_integer(BigInt::from(den));
        if scaled.is_integer() {
            scaled.to_integer().to_u64()
        } else {
            None
        }
    }

    pub fn from_units(units: u64, den: u64) -> TimeValue {
        TimeValue(BigRational::new(BigInt::from(units), BigInt::from(den)))
    }

    /// `"n"` for integers, `"n/d"` otherwise. Used by the CSV formats.
    pub fn to_fraction_string(&self) -> String {
        if self.0.is_integer() {
            self.0.numer().to_string()
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }

    /// Finite decimal expansion, if the denominator only has factors 2 and 5.
    pub fn to_decimal_string(&self) -> Option<String> {
        let mut den = self.0.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0u32;
        let mut fives = 0u32;
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        let digits = twos.max(fives);
        if digits == 0 {
            return Some(self.0.numer().to_string());
        }
        let scaled = (&self.0 * BigRational::from_integer(BigInt::from(10).pow(digits))).to_integer();
        let s = scaled.to_string();
        let (int_part, frac_part) = if s.len() > digits as usize {
            let split = s.len() - digits as usize;
            (s[..split].to_string(), s[split..].to_string())
        } else {
            ("0".to_string(), format!("{:0>width$}", s, width = digits as usize))
        };
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            Some(int_part)
        } else {
            Some(format!("{int_part}.{frac}"))
        }
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_decimal_string() {
            Some(s) => f.write_str(&s),
            None => f.write_str(&self.to_fraction_string()),
        }
    }
}

/// Accepts `"3"`, `"0.125"` and `"1/3"`. Both sides of a fraction may be
/// decimals. Only a leading `+` sign is allowed.
impl FromStr for TimeValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num = parse_decimal(n.trim())?;
            let den = parse_decimal(d.trim())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return TimeValue::from_rational(num / den);
        }
        TimeValue::from_rational(parse_decimal(s)?)
    }
}

fn parse_decimal(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::Parse(format!("invalid time value {s:?}"));
    let body = s.strip_prefix('+').unwrap_or(s);
    if body.is_empty() {
        return Err(bad());
    }
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    Ok(BigRational::new(numer, denom))
}

impl Add for TimeValue {
    type Output = TimeValue;
    fn add(self, rhs: TimeValue) -> TimeValue {
        TimeValue(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a TimeValue> for &'a TimeValue {
    type Output = TimeValue;
    fn add(self, rhs: &'a TimeValue) -> TimeValue {
        TimeValue(&self.0 + &rhs.0)
    }
}

impl<'a> Add<&'a TimeValue> for TimeValue {
    type Output = TimeValue;
    fn add(self, rhs: &'a TimeValue) -> TimeValue {
        TimeValue(self.0 + &rhs.0)
    }
}

impl AddAssign<&TimeValue> for TimeValue {
    fn add_assign(&mut self, rhs: &TimeValue) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for TimeValue {
    fn add_assign(&mut self, rhs: TimeValue) {
        self.0 += rhs.0;
    }
}

/// Panics if the result would be negative; use [`TimeValue::checked_sub`]
/// where that can legitimately happen.
impl<'a> Sub<&'a TimeValue> for &'a TimeValue {
    type Output = TimeValue;
    fn sub(self, rhs: &'a TimeValue) -> TimeValue {
        self.checked_sub(rhs).expect("time value underflow")
    }
}

impl Sub for TimeValue {
    type Output = TimeValue;
    fn sub(self, rhs: TimeValue) -> TimeValue {
        (&self).sub(&rhs)
    }
}

impl<'a> Mul<&'a TimeValue> for &'a TimeValue {
    type Output = TimeValue;
    fn mul(self, rhs: &'a TimeValue) -> TimeValue {
        TimeValue(&self.0 * &rhs.0)
    }
}

impl Sum for TimeValue {
    fn sum<I: Iterator<Item = TimeValue>>(iter: I) -> TimeValue {
        iter.fold(TimeValue::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a TimeValue> for TimeValue {
    fn sum<I: Iterator<Item = &'a TimeValue>>(iter: I) -> TimeValue {
        iter.fold(TimeValue::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

/// JSON form: a decimal string when the expansion terminates, otherwise an
/// integer pair `[num, den]` (or an `"n/d"` string beyond 64-bit range).
impl Serialize for TimeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.to_decimal_string() {
            Some(s) => serializer.serialize_str(&s),
            None => match (self.numer().to_i64(), self.denom().to_i64()) {
                (Some(num), Some(den)) => (num, den).serialize(serializer),
                _ => serializer.serialize_str(&self.to_fraction_string()),
            },
        }
    }
}

impl<'de> Deserialize<'de> for TimeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Pair(i64, i64),
            Int(u64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(de::Error::custom),
            Repr::Pair(n, d) => {
                if d == 0 {
                    return Err(de::Error::custom("zero denominator"));
                }
                TimeValue::from_rational(BigRational::new(n.into(), d.into())).map_err(de::Error::custom)
            }
            Repr::Int(n) => Ok(TimeValue::from_integer(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!("4.08".parse::<TimeValue>().unwrap(), TimeValue::ratio(102, 25));
        assert_eq!("1/3".parse::<TimeValue>().unwrap(), TimeValue::ratio(1, 3));
        assert_eq!(".5".parse::<TimeValue>().unwrap(), TimeValue::ratio(1, 2));
        assert_eq!("7".parse::<TimeValue>().unwrap(), TimeValue::from_integer(7));
        assert!("-1".parse::<TimeValue>().is_err());
        assert!("1/0".parse::<TimeValue>().is_err());
        assert!("abc".parse::<TimeValue>().is_err());
        assert!(".".parse::<TimeValue>().is_err());
    }

    #[test]
    fn display_prefers_decimal() {
        assert_eq!(TimeValue::ratio(102, 25).to_string(), "4.08");
        assert_eq!(TimeValue::ratio(1, 3).to_string(), "1/3");
        assert_eq!(TimeValue::ratio(1, 1000).to_string(), "0.001");
        assert_eq!(TimeValue::from_integer(6).to_string(), "6");
        assert_eq!(TimeValue::ratio(1, 3).to_fraction_string(), "1/3");
    }

    #[test]
    fn json_forms() {
        let v: TimeValue = serde_json::from_str("[1, 3]").unwrap();
        assert_eq!(v, TimeValue::ratio(1, 3));
        assert_eq!(serde_json::to_string(&v).unwrap(), "[1,3]");
        let w: TimeValue = serde_json::from_str("\"0.25\"").unwrap();
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"0.25\"");
        assert!(serde_json::from_str::<TimeValue>("[-1, 3]").is_err());
    }

    #[test]
    fn checked_sub_rejects_underflow() {
        let a = TimeValue::ratio(1, 2);
        let b = TimeValue::ratio(2, 3);
        assert!(a.checked_sub(&b).is_none());
        assert_eq!(b.checked_sub(&a), Some(TimeValue::ratio(1, 6)));
        assert_eq!(a.saturating_sub(&b), TimeValue::zero());
    }

    proptest! {
        #[test]
        fn text_and_json_round_trip(n in 0i64..1_000_000, d in 1i64..100_000) {
            let t = TimeValue::ratio(n, d);
            prop_assert_eq!(t.to_string().parse::<TimeValue>().unwrap(), t.clone());
            prop_assert_eq!(t.to_fraction_string().parse::<TimeValue>().unwrap(), t.clone());
            let json = serde_json::to_string(&t).unwrap();
            prop_assert_eq!(serde_json::from_str::<TimeValue>(&json).unwrap(), t);
        }
    }
}
