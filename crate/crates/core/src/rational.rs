//! Parsing of exact rational inputs and enclosures of rationals and their
//! logarithms.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Parses `p/q`, an integer, or a decimal with optional exponent
/// (`1.25`, `3e-4`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::validation("empty number"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let num = parse_rational(p)?;
        let den = parse_rational(q)?;
        if den.is_zero() {
            return Err(Error::validation(format!("zero denominator in '{s}'")));
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| Error::validation(format!("bad exponent in '{s}'")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::validation(format!("not a number: '{s}'")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::validation(format!("not a number: '{s}'")));
    }
    if exponent.abs() > 4096 {
        return Err(Error::validation(format!("exponent out of range in '{s}'")));
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().expect("digits checked"));
    let shift = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if shift >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::validation(format!("non-finite value {x}")))
}

/// Enclosure of a rational's real value.
pub fn rational_interval(r: &BigRational) -> Interval {
    let x = r.to_f64().unwrap_or(if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY });
    if x.is_finite() && BigRational::from_float(x).as_ref() == Some(r) {
        Interval::point(x)
    } else if x.is_finite() {
        Interval::new(x.next_down(), x.next_up())
    } else if x > 0.0 {
        Interval::new(f64::MAX, f64::INFINITY)
    } else {
        Interval::new(f64::NEG_INFINITY, f64::MIN)
    }
}

pub fn ln2() -> Interval {
    Interval::point(2.0).ln()
}

/// Enclosure of `ln n` for a positive big integer.
pub fn ln_biguint(n: &BigUint) -> Interval {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 53 {
        return Interval::point(n.to_f64().expect("fits")).ln();
    }
    let k = bits - 53;
    let m: BigUint = n >> k;
    let m = m.to_f64().expect("53 bits");
    let head = Interval::new(m, m + 1.0).ln();
    head + ln2() * Interval::point(k as f64)
}

/// Enclosure of `ln r` for a positive rational.
pub fn ln_rational(r: &BigRational) -> Interval {
    debug_assert!(r.is_positive());
    let num = r.numer().to_biguint().expect("positive");
    let den = r.denom().to_biguint().expect("positive");
    ln_biguint(&num) - ln_biguint(&den)
}

pub fn biguint_from_rational_integer(r: &BigRational) -> Option<BigUint> {
    if r.is_integer() && r.numer().sign() != Sign::Minus {
        r.numer().to_biguint()
    } else {
        None
    }
}

/// A positive real parameter: a float value, plus its exact rational value
/// when the input was rational. The constant `e` is accepted by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealParam {
    pub value: f64,
    #[serde(skip)]
    pub exact: Option<BigRational>,
    pub text: String,
}

impl RealParam {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "e" {
            return Ok(RealParam { value: std::f64::consts::E, exact: None, text: "e".into() });
        }
        let exact = parse_rational(t)?;
        let value = exact.to_f64().ok_or_else(|| Error::validation(format!("'{t}' is out of range")))?;
        if !value.is_finite() {
            return Err(Error::validation(format!("'{t}' is out of range")));
        }
        Ok(RealParam { value, exact: Some(exact), text: t.to_string() })
    }

    pub fn from_rational(r: BigRational) -> Self {
        let value = r.to_f64().unwrap_or(f64::NAN);
        RealParam { value, text: r.to_string(), exact: Some(r) }
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        let exact = rational_from_f64(x)?;
        Ok(RealParam { value: x, exact: Some(exact), text: format!("{x}") })
    }

    pub fn interval(&self) -> Interval {
        match &self.exact {
            Some(r) => rational_interval(r),
            None if self.text == "e" => Interval::ONE.exp(),
            None => Interval::point(self.value).widen_ulps(1),
        }
    }

    pub fn ln(&self) -> Interval {
        match &self.exact {
            Some(r) => ln_rational(r),
            None if self.text == "e" => Interval::ONE,
            None => self.interval().ln(),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.value > 0.0 && self.exact.as_ref().is_none_or(|r| r.is_positive())
    }

    pub fn is_one(&self) -> bool {
        self.exact.as_ref().is_some_and(|r| r.is_one())
    }
}

impl fmt::Display for RealParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
