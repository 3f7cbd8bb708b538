//! The exact scalar used everywhere in the crate.
//!
//! `Rational` is an arbitrary-precision fraction, always kept in lowest terms
//! with a positive denominator. The textual form is the canonical `p/q`
//! literal (`p` alone when the denominator is one), which is what map files,
//! orbit files and certificates carry.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::ParseError;

pub type Rational = BigRational;

/// Shorthand constructor; panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half(x: &Rational) -> Rational {
    x / int(2)
}

/// Parses `p/q`, `p`, or a finite decimal such as `0.9` (read exactly as 9/10).
pub fn parse_rational(text: &str) -> Result<Rational, ParseError> {
    let s = text.trim();
    let bad = || ParseError::Rational(s.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{whole_digits}{frac}");
        let mut n = BigInt::from_str(&digits).map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(n, d));
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Canonical literal: `p/q` in lowest terms, or `p` for integers.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

/// Decimal rendering with `digits` significant digits, for plots and reports.
pub fn to_decimal(x: &Rational, digits: usize) -> String {
    let v = to_f64(x);
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn in_unit_interval(x: &Rational) -> bool {
    !x.is_negative() && *x <= one()
}

/// `#[serde(with = ...)]` helper writing a rational as `"p/q"`.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_rational(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("7/18").unwrap(), rat(7, 18));
        assert_eq!(parse_rational("14/36").unwrap(), rat(7, 18));
        assert_eq!(parse_rational("1").unwrap(), one());
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("0.9").unwrap(), rat(9, 10));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "a/b", "1.", "0.x", "1/2/3", "--1"] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn canonical_literals() {
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&rat(3, 1)), "3");
        assert_eq!(format_rational(&rat(0, 5)), "0");
        assert_eq!(format_rational(&rat(1, -3)), "-1/3");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rat(1, 3), 12), "0.333333333333");
        assert_eq!(to_decimal(&rat(7, 18), 12), "0.388888888889");
        assert_eq!(to_decimal(&one(), 12), "1");
        assert_eq!(to_decimal(&zero(), 12), "0");
    }

    #[test]
    fn float_conversion_is_exact() {
        assert_eq!(from_f64(0.5).unwrap(), rat(1, 2));
        assert!(from_f64(f64::NAN).is_none());
    }
}
