//! Scalar field abstraction shared by every computation.
//!
//! Two implementations exist: [`Rational`] (arbitrary-precision, exact) and
//! `f64`. Code generic over [`Scalar`] runs unchanged in either mode; float
//! reductions always follow the same left-to-right order so repeated runs
//! are bit-identical.

use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Signed
    + Send
    + Sync
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    const MODE: Mode;

    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn from_rational(v: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn half(&self) -> Self;
    /// The exact value, when this scalar type carries one.
    fn as_rational(&self) -> Option<Rational>;

    /// JSON encoding: `"p/q"` strings in exact mode, numbers in float mode.
    fn to_json(&self) -> serde_json::Value;

    fn powu(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc *= self;
        }
        acc
    }

    /// Zero test used by verification code: exact equality, or `|x| <= atol`.
    fn is_negligible(&self, atol: f64) -> bool {
        match Self::MODE {
            Mode::Exact => self.is_zero(),
            Mode::Float => self.to_f64().abs() <= atol,
        }
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }

    fn from_rational(v: &Rational) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn half(&self) -> Self {
        self / Rational::from_integer(BigInt::from(2))
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn from_rational(v: &Rational) -> Self {
        rational_to_f64(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn half(&self) -> Self {
        self * 0.5
    }

    fn as_rational(&self) -> Option<Rational> {
        None
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn powu(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

pub fn rational_to_f64(v: &Rational) -> f64 {
    match (v.numer().to_f64(), v.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both parts down so huge operands still convert.
            let bits = v.numer().bits().max(v.denom().bits());
            let shift = bits.saturating_sub(1000);
            let n = (v.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (v.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Lowest terms with a positive denominator, always in `p/q` form.
pub fn format_rational(v: &Rational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Accepts `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in `{s}`")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in `{s}`")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_are_lowest_terms() {
        let r = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rational::new((BigInt::from(3) << 2000u32) + 1, BigInt::from(1) << 2001u32);
        assert!((rational_to_f64(&big) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("exact".parse::<Mode>().unwrap(), Mode::Exact);
        assert!("fuzzy".parse::<Mode>().is_err());
    }
}
