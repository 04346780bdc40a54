//! Exact Lüroth digit arithmetic: first digits, the Lüroth map, finite
//! expansions, evaluation of finite digit strings, and cylinders.
//!
//! Cylinders are left-open and right-closed: `I_n(d) = (⟨d⟩, ⟨d'⟩]` where
//! `d'` is `d` with its last digit decreased by one. A point sitting on the
//! right endpoint belongs to the cylinder, so `x = 1/(d-1)` has first digit
//! `d`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Largest digit `expand` produces unless told otherwise.
pub const DEFAULT_DIGIT_CAP: u64 = (1u64 << 63) - 1;

/// A finite word over the digit alphabet `{2, 3, ...}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LurothWord {
    digits: Vec<u64>,
}

impl LurothWord {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d < 2) {
            return Err(Error::validation(format!("digit {d} is below 2")));
        }
        Ok(LurothWord { digits })
    }

    pub fn empty() -> Self {
        LurothWord { digits: Vec::new() }
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn push(&mut self, d: u64) -> Result<()> {
        if d < 2 {
            return Err(Error::validation(format!("digit {d} is below 2")));
        }
        self.digits.push(d);
        Ok(())
    }

    /// The word followed by one more digit.
    pub fn child(&self, d: u64) -> Result<Self> {
        let mut w = self.clone();
        w.push(d)?;
        Ok(w)
    }

    pub fn concat(&self, other: &LurothWord) -> LurothWord {
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        LurothWord { digits }
    }

    pub fn prefix(&self, n: usize) -> LurothWord {
        LurothWord { digits: self.digits[..n.min(self.digits.len())].to_vec() }
    }

    pub fn into_digits(self) -> Vec<u64> {
        self.digits
    }
}

impl fmt::Display for LurothWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub word: LurothWord,
    pub lower: BigRational,
    pub upper: BigRational,
}

impl Cylinder {
    pub fn length(&self) -> BigRational {
        &self.upper - &self.lower
    }

    /// Membership under the right-closed convention.
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lower < x && x <= &self.upper
    }

    /// Membership in the closure.
    pub fn closure_contains(&self, x: &BigRational) -> bool {
        &self.lower <= x && x <= &self.upper
    }
}

fn check_unit(x: &BigRational, allow_zero: bool) -> Result<()> {
    let ok_low = if allow_zero { !x.is_negative() } else { x.is_positive() };
    if !ok_low || x > &BigRational::one() {
        let range = if allow_zero { "[0,1]" } else { "(0,1]" };
        return Err(Error::domain(format!("{x} is outside {range}")));
    }
    Ok(())
}

fn first_digit_big(x: &BigRational) -> BigInt {
    // floor(1/x) + 1 with x = p/q, so floor(q/p) + 1.
    x.denom().div_floor(x.numer()) + BigInt::one()
}

/// `d_1(x) = ⌊1/x⌋ + 1`, so that `1/d < x ≤ 1/(d-1)`.
pub fn first_digit(x: &BigRational) -> Result<u64> {
    first_digit_capped(x, DEFAULT_DIGIT_CAP)
}

pub fn first_digit_capped(x: &BigRational, cap: u64) -> Result<u64> {
    check_unit(x, false)?;
    let d = first_digit_big(x);
    match d.to_u64() {
        Some(v) if v <= cap => Ok(v),
        _ => Err(Error::resource(format!("digit {d} exceeds the digit cap {cap}"), None)),
    }
}

/// The Lüroth map `x ↦ d(d-1)x - (d-1)` with `d = d_1(x)`, fixing 0.
pub fn luroth_map(x: &BigRational) -> Result<BigRational> {
    check_unit(x, true)?;
    if x.is_zero() {
        return Ok(BigRational::zero());
    }
    let d = first_digit_big(x);
    let dm1 = &d - BigInt::one();
    Ok(x * BigRational::from_integer(&d * &dm1) - BigRational::from_integer(dm1))
}

/// The first `depth` digits of `x`.
pub fn expand(x: &BigRational, depth: usize) -> Result<LurothWord> {
    expand_capped(x, depth, DEFAULT_DIGIT_CAP)
}

pub fn expand_capped(x: &BigRational, depth: usize, cap: u64) -> Result<LurothWord> {
    check_unit(x, false)?;
    if depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let mut y = x.clone();
    let mut digits = Vec::with_capacity(depth);
    for _ in 0..depth {
        let d = first_digit_capped(&y, cap)?;
        let dm1 = BigInt::from(d - 1);
        y = &y * BigRational::from_integer(BigInt::from(d) * &dm1) - BigRational::from_integer(dm1);
        digits.push(d);
    }
    Ok(LurothWord { digits })
}

/// `⟨d_1,…,d_n⟩` for raw digits; the last digit may be 1, which is how
/// right endpoints of cylinders are written.
fn evaluate_raw(digits: &[u64]) -> BigRational {
    let mut sum = BigRational::zero();
    let mut scale = BigInt::one();
    for (i, &d) in digits.iter().enumerate() {
        sum += BigRational::new(BigInt::one(), &scale * BigInt::from(d));
        if i + 1 < digits.len() {
            scale *= BigInt::from(d) * BigInt::from(d - 1);
        }
    }
    sum
}

/// Exact value of the finite Lüroth sum of a non-empty word.
pub fn evaluate(word: &LurothWord) -> Result<BigRational> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    Ok(evaluate_raw(&word.digits))
}

/// `∏ 1/(d_j(d_j-1))`; equals 1 for the empty word.
pub fn cylinder_length(word: &LurothWord) -> BigRational {
    let mut den = BigInt::one();
    for &d in &word.digits {
        den *= BigInt::from(d) * BigInt::from(d - 1);
    }
    BigRational::new(BigInt::one(), den)
}

/// The cylinder `I_n(word)`.
pub fn cylinder_of(word: &LurothWord) -> Result<Cylinder> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let lower = evaluate_raw(&word.digits);
    let mut dec = word.digits.clone();
    *dec.last_mut().expect("non-empty") -= 1;
    let upper = evaluate_raw(&dec);
    Ok(Cylinder { word: word.clone(), lower, upper })
}

/// Cylinder of a possibly empty word; the empty word gives `(0, 1]`.
pub fn cylinder_or_unit(word: &LurothWord) -> Cylinder {
    if word.is_empty() {
        Cylinder { word: word.clone(), lower: BigRational::zero(), upper: BigRational::one() }
    } else {
        cylinder_of(word).expect("non-empty")
    }
}

/// The left shift `σ`.
pub fn shift(word: &LurothWord) -> Result<LurothWord> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    Ok(LurothWord { digits: word.digits[1..].to_vec() })
}
