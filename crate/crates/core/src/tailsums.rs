//! Weighted digit tail sums
//! `S_m(t; g) = Σ_{d_1^{t_0}⋯d_m^{t_{m-1}} ≥ g} ∏ 1/(d_j(d_j-1))`
//! and the matching integral over `x_i ≥ 2`, `x_1⋯x_m > g` of `∏ x_i^{-2}`.

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::{ln2, rational_from_f64};
use crate::threshold::{exact_product_ge, least_digit, ln_digit, RationalTarget, Target, INF_DIGIT};
use crate::weights::WeightVector;

pub const DEFAULT_TERM_BUDGET: u64 = 100_000_000;
const BLOCK_END: u128 = 1 << 120;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSumResult {
    pub lower: f64,
    pub upper: f64,
    pub terms_enumerated: u64,
}

impl TailSumResult {
    pub fn enclosure(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Mass `1/(D-1)` of the digits `≥ D`, for a bracket of `D`.
pub(crate) fn tail_mass(lo: u128, hi: u128) -> Interval {
    let upper = if lo == INF_DIGIT { 0.0 } else { (Interval::ONE / Interval::from_u128(lo - 1)).hi };
    let lower = if hi == INF_DIGIT { 0.0 } else { (Interval::ONE / Interval::from_u128(hi - 1)).lo };
    Interval::new(lower, upper)
}

/// Relative width allowed for the closed-form innermost sums.
const CLOSED_FORM_SLACK: f64 = 1e-12;
const COARSE_RHO: f64 = 0.1;

struct Enumerator<'a> {
    t: &'a WeightVector,
    target: &'a dyn Target,
    ln_target: Interval,
    ln_rest: Vec<Interval>,
    /// Relative width a block may have at each level.
    slack: Vec<f64>,
    budget: u64,
    terms: u64,
    acc: Interval,
    prefix: Vec<u128>,
}

impl Enumerator<'_> {
    fn exact_with(&self, tail: &[u128]) -> Option<bool> {
        let mut digits = self.prefix.clone();
        digits.extend_from_slice(tail);
        let weights = &self.t.exact_all()[..digits.len()];
        exact_product_ge(&digits, weights, self.target)
    }

    fn level(&mut self, k: usize, ln_prefix: Interval, mass: Interval) {
        let m = self.t.m();
        let w = self.t.get(k);
        if k + 1 == m {
            let exact = |d: u128| self.exact_with(&[d]);
            let (lo, hi) = least_digit(ln_prefix, w, self.ln_target, Some(&exact));
            self.acc = self.acc + mass * tail_mass(lo, hi);
            self.terms += 1;
            return;
        }
        // From `full` on, every completion qualifies whatever the later digits.
        let rest = m - k - 1;
        let exact = |d: u128| {
            let mut tail = vec![d];
            tail.extend(std::iter::repeat_n(2, rest));
            self.exact_with(&tail)
        };
        let (_, full) = least_digit(ln_prefix + self.ln_rest[k], w, self.ln_target, Some(&exact));
        let below = self.sweep(k, ln_prefix, full);
        self.acc = self.acc + mass * below;
        if full != INF_DIGIT {
            self.acc = self.acc + mass * tail_mass(full, full);
        }
        self.terms += 1;
    }

    /// `Σ_{2 ≤ d < full} 1/(d(d-1)) · inner(d)`, with `inner` the sum over
    /// the later digits, which is non-decreasing in `d`. A block `[a, b]` is
    /// enclosed by `inner(a)` and `inner(b)`; blocks double while their
    /// relative width stays within the level's slack and halve otherwise.
    /// Single digits are always accepted.
    fn sweep(&mut self, k: usize, ln_prefix: Interval, full: u128) -> Interval {
        let end = full.min(BLOCK_END);
        let slack = self.slack[k];
        let mut sum = Interval::ZERO;
        let mut a: u128 = 2;
        let mut step: u128 = 1;
        let mut inner_a = if a < end { self.inner(k, ln_prefix, a) } else { Interval::ZERO };
        while a < end {
            if self.terms >= self.budget {
                return sum + Interval::new(0.0, tail_mass(a, a).hi);
            }
            let b = a.saturating_add(step - 1).min(end - 1);
            let inner_b = if b == a { inner_a } else { self.inner(k, ln_prefix, b) };
            let block = Interval::from_u128(b - a + 1) / (Interval::from_u128(a - 1) * Interval::from_u128(b));
            let value = block * Interval::new(inner_a.lo, inner_b.hi);
            if b > a && value.hi - value.lo > slack * value.hi {
                step = (step / 2).max(1);
                continue;
            }
            sum = sum + Interval::new(value.lo.max(0.0), value.hi);
            a = b + 1;
            step = step.saturating_mul(2);
            if a < end {
                inner_a = self.inner(k, ln_prefix, a);
            }
        }
        if end < full {
            sum = sum + Interval::new(0.0, tail_mass(end, end).hi);
        }
        sum
    }

    /// The sum over digits `k+1..` with digit `k` fixed at `d`, at unit mass.
    fn inner(&mut self, k: usize, ln_prefix: Interval, d: u128) -> Interval {
        let saved = std::mem::replace(&mut self.acc, Interval::ZERO);
        self.prefix.push(d);
        self.level(k + 1, ln_prefix + ln_digit(d) * self.t.get(k), Interval::ONE);
        self.prefix.pop();
        std::mem::replace(&mut self.acc, saved)
    }
}

/// Per-level block slack for a target relative width `rho` on the variation
/// of each block: inner widths propagate doubled to the level above.
fn slacks(m: usize, rho: f64) -> Vec<f64> {
    let mut out = vec![CLOSED_FORM_SLACK; m];
    for k in (0..m.saturating_sub(1)).rev() {
        out[k] = rho + 2.0 * out[k + 1];
    }
    out
}

/// Certified enclosure of `S_m(t; target)` with an explicit term budget.
///
/// A coarse pass bounds the sum; a second pass, when needed, shrinks the
/// blocks so the relative width matches `tol`.
pub fn tail_sum_target(t: &WeightVector, target: &dyn Target, tol: f64, budget: u64) -> Result<TailSumResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let m = t.m();
    let l2 = ln2();
    let mut ln_rest = vec![Interval::ZERO; m];
    for k in (0..m.saturating_sub(1)).rev() {
        ln_rest[k] = ln_rest[k + 1] + l2 * t.get(k + 1);
    }
    let mut e = Enumerator {
        t,
        target,
        ln_target: target.ln(),
        ln_rest,
        slack: slacks(m, COARSE_RHO),
        budget,
        terms: 0,
        acc: Interval::ZERO,
        prefix: Vec::with_capacity(m),
    };
    e.level(0, Interval::ZERO, Interval::ONE);
    let mut acc = e.acc;
    if acc.hi - acc.lo > tol && e.terms < budget {
        // relative width is at most slack[0], which grows like 2^(m-1) rho
        let scale = (1u64 << (m - 1).min(62)) as f64;
        let rho = (tol / (2.0 * scale * acc.hi.max(f64::MIN_POSITIVE))).min(COARSE_RHO);
        e.slack = slacks(m, rho);
        e.acc = Interval::ZERO;
        e.level(0, Interval::ZERO, Interval::ONE);
        acc = e.acc;
    }
    let acc = Interval::new(acc.lo.max(0.0), acc.hi.min(1.0));
    let result = TailSumResult { lower: acc.lo, upper: acc.hi, terms_enumerated: e.terms };
    if result.width() > tol {
        return Err(Error::resource(
            format!("enclosure width {:e} exceeds tolerance {:e} after {} terms", result.width(), tol, e.terms),
            Some((result.lower, result.upper)),
        ));
    }
    Ok(result)
}

/// Certified enclosure of `S_m(t; g)` for a positive rational `g`.
pub fn tail_sum(t: &WeightVector, g: &BigRational, tol: f64) -> Result<TailSumResult> {
    if !g.is_positive() {
        return Err(Error::domain(format!("threshold g = {g} must be positive")));
    }
    tail_sum_target(t, &RationalTarget::new(g.clone()), tol, DEFAULT_TERM_BUDGET)
}

/// [`tail_sum`] for a float threshold, taken at its exact binary value.
pub fn tail_sum_f64(t: &WeightVector, g: f64, tol: f64) -> Result<TailSumResult> {
    if !(g > 0.0) {
        return Err(Error::domain(format!("threshold g = {g} must be positive")));
    }
    tail_sum(t, &rational_from_f64(g)?, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub g: f64,
    pub lower: f64,
    pub upper: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

impl ProfileRow {
    pub fn ratio(&self) -> f64 {
        0.5 * (self.ratio_lower + self.ratio_upper)
    }
}

/// `S_m(t;g) · g^{1/T} / log^{ℓ-1} g` along an increasing grid.
pub fn asymptotic_profile(t: &WeightVector, g_grid: &[f64], tol: f64) -> Result<Vec<ProfileRow>> {
    let floor = 2f64.powf(t.m() as f64 * t.t_min());
    if g_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("g grid must be strictly increasing"));
    }
    let big_t = Interval::point(t.t_max());
    let power = (t.ell() - 1) as u32;
    g_grid
        .iter()
        .map(|&g| {
            if !(g >= floor) {
                return Err(Error::domain(format!("g = {g} is below 2^(m t) = {floor}")));
            }
            let s = tail_sum_f64(t, g, tol)?;
            let ln_g = Interval::point(g).ln();
            let ratio = s.enclosure() * (ln_g / big_t).exp() / ln_g.powi(power);
            Ok(ProfileRow { g, lower: s.lower, upper: s.upper, ratio_lower: ratio.lo, ratio_upper: ratio.hi })
        })
        .collect()
}

pub const DEFAULT_QUAD_BUDGET: usize = 200_000;

fn khinchin_level(k: u32, g: Interval, tol: f64, budget: usize) -> Result<Interval> {
    let full = Interval::point(0.5f64.powi(k as i32));
    let corner = 2f64.powi(k as i32);
    if g.hi <= corner {
        return Ok(full);
    }
    if g.lo < corner {
        let at = khinchin_level(k, Interval::new(corner, g.hi), tol, budget)?;
        return Ok(at.hull(&full));
    }
    if k == 1 {
        return Ok(g.recip());
    }
    // ∫_2^{g/2^{k-1}} x^{-2} I_{k-1}(g/x) dx + 1/g, with x = e^u.
    let l2 = ln2();
    let ln_g = g.ln();
    let a = l2.lo;
    let b = (ln_g - l2 * ((k - 1) as f64)).hi;
    let length = (b - a).max(0.0);
    let inner_tol = tol / (2.0 * (length + 1.0));
    let phi = |u: f64| -> Result<Interval> {
        let e = Interval::point(-u).exp();
        Ok(e * khinchin_level(k - 1, g * e, inner_tol, budget)?)
    };
    let integral = convex_quadrature(&phi, a, b, tol / 2.0, budget)?;
    Ok(integral + g.recip())
}

struct Segment {
    a: f64,
    b: f64,
    fa: Interval,
    fb: Interval,
    value: Interval,
}

impl Segment {
    fn new(a: f64, b: f64, fa: Interval, fb: Interval, fm: Interval) -> Self {
        let h = Interval::point(b) - Interval::point(a);
        let lower = (h * fm).lo;
        let upper = (h * (fa + fb) * 0.5).hi;
        Segment { a, b, fa, fb, value: Interval::new(lower.min(upper), upper.max(lower)) }
    }
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.value.width() == o.value.width()
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.value.width().total_cmp(&o.value.width())
    }
}

/// Integral of a convex function: the midpoint rule bounds it from below
/// and the trapezoid rule from above on every segment. Segments with the
/// widest bracket are split until the total width is below `tol`.
fn convex_quadrature(f: &dyn Fn(f64) -> Result<Interval>, a: f64, b: f64, tol: f64, budget: usize) -> Result<Interval> {
    if b <= a {
        return Ok(Interval::ZERO);
    }
    let mid = 0.5 * (a + b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment::new(a, b, f(a)?, f(b)?, f(mid)?));
    loop {
        let total = heap.iter().fold(Interval::ZERO, |acc, s| acc + s.value);
        if total.width() <= tol {
            return Ok(total);
        }
        if heap.len() >= budget {
            return Err(Error::resource(
                format!("quadrature budget of {budget} segments exhausted"),
                Some((total.lo, total.hi)),
            ));
        }
        let s = heap.pop().expect("non-empty");
        let m = 0.5 * (s.a + s.b);
        let fm = f(m)?;
        heap.push(Segment::new(s.a, m, s.fa, fm, f(0.5 * (s.a + m))?));
        heap.push(Segment::new(m, s.b, fm, s.fb, f(0.5 * (m + s.b))?));
    }
}

/// Certified enclosure of `∫_{x_i ≥ 2, x_1⋯x_m > g} ∏ x_i^{-2} dx` for
/// `m ≤ 3`, by peeling off one coordinate at a time.
pub fn khinchin_integral(m: u32, g: f64, quad_tol: f64) -> Result<Interval> {
    if !(1..=3).contains(&m) {
        return Err(Error::domain(format!("m = {m} must be 1, 2 or 3")));
    }
    if !(g > 2f64.powi(m as i32)) {
        return Err(Error::domain(format!("g = {g} must exceed 2^{m}")));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    khinchin_level(m, Interval::point(g), quad_tol, DEFAULT_QUAD_BUDGET)
}
