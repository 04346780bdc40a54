//! Closed intervals of `f64` with outward rounding.
//!
//! Basic operations detect exactness with error-free transformations
//! (two-sum, fused multiply-add residuals) and step one ulp outward only
//! on the side where the rounded result may have crossed the true value.
//! `exp` and `ln` trust the platform libm to within one ulp and widen by
//! two ulps on each side.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const TINY: f64 = 1e-290;

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn mul_dir(a: f64, b: f64, up: bool) -> f64 {
    let p = a * b;
    if !p.is_finite() || p == 0.0 && (a == 0.0 || b == 0.0) {
        return p;
    }
    if p.abs() < TINY {
        return if up { p.next_up() } else { p.next_down() };
    }
    let e = a.mul_add(b, -p);
    if up && e > 0.0 {
        p.next_up()
    } else if !up && e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

fn div_dir(a: f64, b: f64, up: bool) -> f64 {
    let q = a / b;
    if !q.is_finite() || a == 0.0 {
        return q;
    }
    if q.abs() < TINY || a.abs() < TINY {
        return if up { q.next_up() } else { q.next_down() };
    }
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        return q;
    }
    let correction_negative = (r < 0.0) != (b < 0.0);
    if up && !correction_negative {
        q.next_up()
    } else if !up && correction_negative {
        q.next_down()
    } else {
        q
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn entire_positive() -> Self {
        Interval { lo: 0.0, hi: f64::INFINITY }
    }

    /// Enclosure of an integer that may not be representable.
    pub fn from_u128(n: u128) -> Self {
        let x = n as f64;
        if n < (1u128 << 53) {
            Interval::point(x)
        } else {
            Interval::new(x.next_down(), x.next_up())
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        if self.lo.is_finite() && self.hi.is_finite() {
            0.5 * self.lo + 0.5 * self.hi
        } else if self.lo.is_finite() {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn widen_ulps(&self, k: u32) -> Interval {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for _ in 0..k {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Interval::new(lo, hi)
    }

    pub fn recip(&self) -> Interval {
        Interval::ONE / *self
    }

    pub fn exp(&self) -> Interval {
        let lo = if self.lo == 0.0 { 1.0 } else { self.lo.exp().next_down().next_down().max(0.0) };
        let hi = if self.hi == 0.0 { 1.0 } else { self.hi.exp().next_up().next_up() };
        Interval::new(lo, hi)
    }

    /// Natural logarithm; requires `lo > 0`.
    pub fn ln(&self) -> Interval {
        debug_assert!(self.lo > 0.0, "ln of non-positive interval");
        let lo = if self.lo == 1.0 { 0.0 } else { self.lo.ln().next_down().next_down() };
        let hi = if self.hi == 1.0 { 0.0 } else { self.hi.ln().next_up().next_up() };
        Interval::new(lo, hi)
    }

    /// `self^e` for a positive base.
    pub fn powf(&self, e: Interval) -> Interval {
        (self.ln() * e).exp()
    }

    pub fn powi(&self, k: u32) -> Interval {
        let mut acc = Interval::ONE;
        for _ in 0..k {
            acc = acc * *self;
        }
        acc
    }

    pub fn max(&self, other: Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min(&self, other: Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(add_down(self.lo, -o.hi), add_up(self.hi, -o.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        if self.lo >= 0.0 && o.lo >= 0.0 {
            return Interval::new(mul_dir(self.lo, o.lo, false), mul_dir(self.hi, o.hi, true));
        }
        let cands = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in cands {
            lo = lo.min(mul_dir(a, b, false));
            hi = hi.max(mul_dir(a, b, true));
        }
        Interval::new(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        debug_assert!(o.lo > 0.0 || o.hi < 0.0, "division by interval containing zero");
        let cands = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in cands {
            lo = lo.min(div_dir(a, b, false));
            hi = hi.max(div_dir(a, b, true));
        }
        Interval::new(lo, hi)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, o: f64) -> Interval {
        self * Interval::point(o)
    }
}

/// Pairwise summation; the enclosure width grows with the depth of the
/// summation tree rather than the number of terms.
pub fn sum_pairwise(terms: &[Interval]) -> Interval {
    match terms.len() {
        0 => Interval::ZERO,
        1 => terms[0],
        n => {
            let (a, b) = terms.split_at(n / 2);
            sum_pairwise(a) + sum_pairwise(b)
        }
    }
}
