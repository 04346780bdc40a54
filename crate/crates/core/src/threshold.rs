//! Comparisons of weighted digit products `∏ d_i^{t_i}` against a target,
//! and the least digit completing such a product.
//!
//! Comparisons run on logarithm enclosures first. When an enclosure cannot
//! decide, and all weights and the target are rational, the comparison is
//! redone exactly after raising both sides to a common integer power.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::interval::Interval;
use crate::rational::{ln2, ln_rational};

/// Stand-in for "no finite digit": every digit is below the threshold.
pub const INF_DIGIT: u128 = u128::MAX;

const MAX_COMMON_POWER: u64 = 1 << 20;
const MAX_EXACT_BITS: u64 = 1 << 22;

/// Something a weighted digit product is compared against.
pub trait Target {
    fn ln(&self) -> Interval;

    /// `target^l` exactly, if the target is rational (or `l` clears its
    /// irrationality). `l` is always a multiple of [`Target::root_hint`].
    fn exact_pow(&self, l: u64) -> Option<BigRational>;

    /// A denominator the common power must be divisible by.
    fn root_hint(&self) -> u64 {
        1
    }
}

#[derive(Clone, Debug)]
pub struct RationalTarget {
    pub value: BigRational,
    ln: Interval,
}

impl RationalTarget {
    pub fn new(value: BigRational) -> Self {
        let ln = ln_rational(&value);
        RationalTarget { value, ln }
    }
}

impl Target for RationalTarget {
    fn ln(&self) -> Interval {
        self.ln
    }

    fn exact_pow(&self, l: u64) -> Option<BigRational> {
        let bits = self.value.numer().bits().max(self.value.denom().bits());
        if bits.saturating_mul(l) > MAX_EXACT_BITS {
            return None;
        }
        Some(num_traits::pow(self.value.clone(), l as usize))
    }
}

/// Exact test of `∏ d_i^{w_i} ≥ target`, or `None` when it would be too
/// expensive or the target has no exact form.
pub fn exact_product_ge(digits: &[u128], weights: &[BigRational], target: &dyn Target) -> Option<bool> {
    debug_assert_eq!(digits.len(), weights.len());
    let mut l = BigInt::from(target.root_hint());
    for w in weights {
        l = l.lcm(w.denom());
    }
    let l = l.to_u64().filter(|&v| v <= MAX_COMMON_POWER)?;
    let mut lhs = BigUint::one();
    let mut bits = 0u64;
    for (&d, w) in digits.iter().zip(weights) {
        let e = (w.numer() * BigInt::from(l) / w.denom()).to_u64()?;
        let dbits = 128 - d.leading_zeros() as u64;
        bits = bits.saturating_add(e.saturating_mul(dbits));
        if bits > MAX_EXACT_BITS {
            return None;
        }
        lhs *= BigUint::from(d).pow(e as u32);
    }
    let rhs = target.exact_pow(l)?;
    let lhs = BigInt::from(lhs) * rhs.denom();
    Some(&lhs >= rhs.numer())
}

/// Decides `ln_lhs ≥ ln_target`, falling back to `exact` when the
/// enclosures overlap. `None` means undecidable at this precision.
pub fn decide_ge(ln_lhs: Interval, ln_target: Interval, exact: impl FnOnce() -> Option<bool>) -> Option<bool> {
    if ln_lhs.lo >= ln_target.hi {
        Some(true)
    } else if ln_lhs.hi < ln_target.lo {
        Some(false)
    } else {
        exact()
    }
}

pub fn ln_digit(d: u128) -> Interval {
    Interval::from_u128(d).ln()
}

fn ceil_u128(y: f64) -> u128 {
    if !(y < 1.7e38) {
        INF_DIGIT
    } else {
        (y.ceil() as u128).max(2)
    }
}

/// Bracket `[lo, hi]` for the least integer `d ≥ 2` with
/// `prefix · d^w ≥ target`, given `ln prefix` and `ln target`. `exact`
/// answers the same inequality for a specific `d` exactly when it can.
pub fn least_digit(
    ln_prefix: Interval,
    w: f64,
    ln_target: Interval,
    exact: Option<&dyn Fn(u128) -> Option<bool>>,
) -> (u128, u128) {
    if ln_prefix.lo == f64::INFINITY || ln_target.hi == f64::NEG_INFINITY {
        return (2, 2);
    }
    let x = (ln_target - ln_prefix) / Interval::point(w);
    let l2 = ln2();
    if x.hi <= l2.lo {
        return (2, 2);
    }
    let y = x.exp();
    let lo = if x.lo <= l2.hi { 2 } else { ceil_u128(y.lo) };
    let hi = ceil_u128(y.hi);
    if lo == hi {
        return (lo, hi);
    }
    let Some(exact) = exact else {
        return (lo, hi);
    };
    if hi == INF_DIGIT || hi - lo > (1u128 << 40) {
        return (lo, hi);
    }
    let (mut a, mut b) = (lo, hi);
    // invariant: the least qualifying digit lies in [a, b]
    while a < b {
        let mid = a + (b - a) / 2;
        match exact(mid) {
            Some(true) => b = mid,
            Some(false) => a = mid + 1,
            None => return (a, b),
        }
    }
    (a, a)
}
