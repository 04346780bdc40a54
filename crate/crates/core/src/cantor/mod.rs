//! A finite-depth build of the Cantor subset `E` of the weighted two-digit
//! limsup set `{d_n^{t_0} d_{n+1}^{t_1} ≥ B^n i.o.}`, with its fundamental
//! intervals and mass distribution.
//!
//! Digits at positions `n_k` and `n_k + 1` range over
//! `[⌈α_0^{n_k}⌉, ⌊2α_0^{n_k}⌋]` and `[⌈α_1^{n_k}⌉, ⌊2α_1^{n_k}⌋]`; every
//! other digit ranges over `[2, M]`. The free positions form blocks of
//! `ℓ_k N` digits before each `n_k`. With `s = s_M(B)` and
//! `Z = Σ_{d=2}^M (d(d-1))^{-s} = α_0^s`, the mass of a block prefix `w`
//! whose length `q` rounds up to the multiple `q'` of `N` is
//! `|I(w)|^s Z^{q'-q} / α_0^{s q'}`, and each special digit splits mass
//! evenly among its admissible values.

mod checks;

pub use checks::{
    holder_ball_scan, run_checks, sample_member, tree_dump, CantorReport, CheckOptions, GapLevel, HolderRow, NodeDump,
};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::HashMap;

use crate::dimsolve::{f_weighted, solve_truncated_sequence, DimKind};
use crate::error::{Error, Result};
use crate::expansion::LurothWord;
use crate::interval::{sum_pairwise, Interval};
use crate::rational::RealParam;
use crate::weights::WeightVector;

const S_TOL: f64 = 1e-14;
const MAX_SPECIAL_DIGIT: f64 = 4.0e18;

/// Parameters of the construction, with everything derived from them.
#[derive(Clone, Debug, Serialize)]
pub struct CantorParams {
    pub b: RealParam,
    #[serde(skip)]
    pub t: WeightVector,
    pub weights: (f64, f64),
    pub m: u64,
    pub n: u64,
    pub ell: Vec<u64>,
    /// `s = s_M(B)`, the root of the equation truncated at digit `M`
    pub s: f64,
    pub s_bracket: (f64, f64),
    pub a: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    /// special positions `n_1 < n_2 < …`
    pub n_k: Vec<u64>,
    /// admissible ranges at `n_k` and `n_k + 1`
    pub range0: Vec<(u64, u64)>,
    pub range1: Vec<(u64, u64)>,
    /// `|f_{t0,t1}(s) log B - f_{t0}(s) log A|`
    pub relation_residual: f64,
    #[serde(skip)]
    ln_z: Interval,
    #[serde(skip)]
    ln_alpha0: Interval,
    #[serde(skip)]
    ln_alpha1: Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Free,
    /// position `n_k` (index `k` from 0)
    First(usize),
    /// position `n_k + 1`
    Second(usize),
}

fn ceil_floor(alpha_pow: Interval) -> Result<(u64, u64)> {
    if !(alpha_pow.hi < MAX_SPECIAL_DIGIT) {
        return Err(Error::resource(format!("special digit bound {:e} does not fit in 64 bits", alpha_pow.hi), None));
    }
    // the lower end errs upward so admissible digits always clear α^n
    let lo = (alpha_pow.hi.ceil() as u64).max(2);
    let hi = (2.0 * alpha_pow.lo).floor() as u64;
    Ok((lo, hi))
}

/// The `k ≥ 2` (1-based) at which `(2k-1) ratio < n_1 + … + n_k` fails,
/// with `ratio = log α_0 / log α_1`.
pub fn sparsity_failures(ratio: f64, n_k: &[u64]) -> Vec<usize> {
    (2..=n_k.len()).filter(|&k| !((2 * k - 1) as f64 * ratio < n_k[..k].iter().sum::<u64>() as f64)).collect()
}

/// Builds the construction for `B`, `t = (t_0, t_1)`, digit bound `M`,
/// block length `N` (the least `N` with `α_0^N > 2` when `None`) and
/// block counts `ℓ_1, …, ℓ_K`.
pub fn derive_params(b: RealParam, t: WeightVector, m: u64, n: Option<u64>, ell: Vec<u64>) -> Result<CantorParams> {
    if !(b.value > 1.0) || !b.value.is_finite() {
        return Err(Error::validation(format!("B = {b} must exceed 1")));
    }
    if t.m() != 2 {
        return Err(Error::validation("the construction needs exactly two weights"));
    }
    if m < 5 {
        return Err(Error::validation(format!("M = {m} must be at least 5")));
    }
    if ell.is_empty() || ell.contains(&0) {
        return Err(Error::validation("the block schedule must be a non-empty list of positive integers"));
    }
    let (t0, t1) = (t.get(0), t.get(1));
    let kind = DimKind::PairWeighted { t0, t1 };
    let row = solve_truncated_sequence(&kind, b.value, &[m], S_TOL)?.remove(0);
    let s = 0.5 * (row.s_lower + row.s_upper);
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::validation(format!("s_M(B) = {s} is not in (1/2, 1); increase M")));
    }
    if !((2.0 * s - 1.0) / t0 < s / t1) {
        return Err(Error::validation(format!(
            "(2s-1)/t_0 ≥ s/t_1 at s = {s}: this is the single-digit case, where the lower bound comes from the set {{d_n ≥ B^(n/t_0)}} instead of this construction"
        )));
    }
    let si = Interval::point(s);
    let f = f_weighted(t0, t1, s)?;
    let f_iv = kind.exponent(si);
    let ln_b = b.ln();
    // f_{t0,t1}(s) log B = f_{t0}(s) log A with f_{t0}(s) = s/t0
    let ln_a = f_iv * ln_b * Interval::point(t0) / si;
    let a = ln_a.mid().exp();
    if !(ln_a.lo > 0.0 && ln_a.hi < ln_b.lo) {
        return Err(Error::validation(format!("A = {a} is not strictly between 1 and B")));
    }
    let relation_residual = (f * ln_b.mid() - (s / t0) * ln_a.mid()).abs();
    let ln_alpha0 = ln_a / Interval::point(t0);
    let ln_alpha1 = (ln_b - ln_a) / Interval::point(t1);

    let n = match n {
        Some(n) => {
            if !(ln_alpha0.lo * n as f64 > std::f64::consts::LN_2) {
                return Err(Error::validation(format!("α_0^N = {} must exceed 2", (ln_alpha0.mid() * n as f64).exp())));
            }
            n
        }
        None => (1..=10_000u64)
            .find(|&n| (ln_alpha0 * n as f64).lo > std::f64::consts::LN_2)
            .ok_or_else(|| Error::validation("α_0 is too close to 1 for any N ≤ 10^4"))?,
    };

    let mut n_k = Vec::with_capacity(ell.len());
    for (k, &l) in ell.iter().enumerate() {
        let v = if k == 0 { l * n + 1 } else { n_k[k - 1] + l * n + 2 };
        n_k.push(v);
    }
    let failing = sparsity_failures(ln_alpha0.mid() / ln_alpha1.mid(), &n_k);
    if !failing.is_empty() {
        return Err(Error::validation(format!(
            "schedule is not sparse enough: (2k-1) log α_0 / log α_1 < n_1 + … + n_k fails for k in {failing:?}"
        )));
    }

    let mut range0 = Vec::new();
    let mut range1 = Vec::new();
    for &nk in &n_k {
        let r0 = ceil_floor((ln_alpha0 * nk as f64).exp())?;
        let r1 = ceil_floor((ln_alpha1 * nk as f64).exp())?;
        for (r, which) in [(r0, 0), (r1, 1)] {
            if r.0 > r.1 {
                return Err(Error::validation(format!(
                    "no admissible digit at position {} (range [{}, {}])",
                    nk + which,
                    r.0,
                    r.1
                )));
            }
        }
        range0.push(r0);
        range1.push(r1);
    }

    let z = sum_pairwise(
        &(2..=m).map(|d| (-(si * Interval::from_u128((d * (d - 1)) as u128).ln())).exp()).collect::<Vec<_>>(),
    );
    Ok(CantorParams {
        weights: (t0, t1),
        b,
        t,
        m,
        n,
        ell,
        s,
        s_bracket: (row.s_lower, row.s_upper),
        a,
        alpha0: ln_alpha0.mid().exp(),
        alpha1: ln_alpha1.mid().exp(),
        n_k,
        range0,
        range1,
        relation_residual,
        ln_z: z.ln(),
        ln_alpha0,
        ln_alpha1,
    })
}

/// Default desk-scale parameters: `B = 2`, `t = (1,1)`, `M = 10`,
/// `ℓ = (2, 3)`, minimal `N`.
pub fn default_params() -> Result<CantorParams> {
    derive_params(RealParam::parse("2")?, WeightVector::parse("1,1")?, 10, None, vec![2, 3])
}

impl CantorParams {
    /// Deepest level the schedule describes, `n_K + 1`.
    pub fn max_level(&self) -> usize {
        (*self.n_k.last().expect("non-empty") + 1) as usize
    }

    pub fn position(&self, p: u64) -> Position {
        for (k, &nk) in self.n_k.iter().enumerate() {
            if p == nk {
                return Position::First(k);
            }
            if p == nk + 1 {
                return Position::Second(k);
            }
        }
        Position::Free
    }

    /// Admissible digit range at position `p` (1-based).
    pub fn range_at(&self, p: u64) -> (u64, u64) {
        match self.position(p) {
            Position::Free => (2, self.m),
            Position::First(k) => self.range0[k],
            Position::Second(k) => self.range1[k],
        }
    }

    pub fn count_at(&self, p: u64) -> u64 {
        let (lo, hi) = self.range_at(p);
        hi - lo + 1
    }

    pub fn ln_alpha0(&self) -> Interval {
        self.ln_alpha0
    }

    pub fn ln_alpha1(&self) -> Interval {
        self.ln_alpha1
    }

    pub fn ln_z(&self) -> Interval {
        self.ln_z
    }

    fn check_word(&self, word: &LurothWord) -> Result<()> {
        if word.len() > self.max_level() {
            return Err(Error::resource(
                format!("level {} exceeds the schedule's last level {}", word.len(), self.max_level()),
                None,
            ));
        }
        for (i, &d) in word.digits().iter().enumerate() {
            let (lo, hi) = self.range_at(i as u64 + 1);
            if d < lo || d > hi {
                return Err(Error::validation(format!(
                    "word {word} is not admissible: digit {d} at position {} is outside [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Start and end positions of block `k` (0-based): `start ..= n_k - 1`.
    fn block(&self, k: usize) -> (u64, u64) {
        let start = if k == 0 { 1 } else { self.n_k[k - 1] + 2 };
        (start, self.n_k[k] - 1)
    }

    /// `log μ(J_n(word))` for an admissible word.
    pub fn ln_mass_unchecked(&self, digits: &[u64]) -> Interval {
        let len = digits.len() as u64;
        let s = Interval::point(self.s);
        let nn = self.n;
        let mut ln_mu = Interval::ZERO;
        for k in 0..self.n_k.len() {
            let (start, end) = self.block(k);
            if len < start {
                break;
            }
            let q = (len.min(end) + 1 - start) as usize;
            let mut ln_len = Interval::ZERO;
            for &d in &digits[(start - 1) as usize..(start - 1) as usize + q] {
                ln_len = ln_len + Interval::from_u128(d as u128 * (d as u128 - 1)).ln();
            }
            let q = q as u64;
            let q_up = q.div_ceil(nn) * nn;
            ln_mu = ln_mu - s * ln_len + self.ln_z * ((q_up - q) as f64) - s * self.ln_alpha0 * (q_up as f64);
            let nk = self.n_k[k];
            if len >= nk {
                ln_mu = ln_mu - Interval::from_u128(self.count_at(nk) as u128).ln();
            }
            if len > nk {
                ln_mu = ln_mu - Interval::from_u128(self.count_at(nk + 1) as u128).ln();
            }
            if len <= nk + 1 {
                break;
            }
        }
        ln_mu
    }
}

/// Digit range for the next position after `word`. Positions past the
/// schedule are free.
pub fn admissible_children(params: &CantorParams, word: &LurothWord) -> Result<(u64, u64)> {
    params.check_word(word)?;
    Ok(params.range_at(word.len() as u64 + 1))
}

/// `μ(J_n(word))`.
pub fn mass(params: &CantorParams, word: &LurothWord) -> Result<Interval> {
    params.check_word(word)?;
    Ok(params.ln_mass_unchecked(word.digits()).exp())
}

/// Memoised masses.
pub struct MassCache<'a> {
    params: &'a CantorParams,
    memo: HashMap<Vec<u64>, Interval>,
}

impl<'a> MassCache<'a> {
    pub fn new(params: &'a CantorParams) -> Self {
        MassCache { params, memo: HashMap::new() }
    }

    pub fn get(&mut self, word: &LurothWord) -> Result<Interval> {
        if let Some(v) = self.memo.get(word.digits()) {
            return Ok(*v);
        }
        let v = mass(self.params, word)?;
        self.memo.insert(word.digits().to_vec(), v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}

/// A cylinder `(a/Q, (a+1)/Q]` kept with integer numerator and the
/// denominator `Q = ∏ d_j(d_j-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Node {
    pub digits: Vec<u64>,
    pub a: BigUint,
    pub q: BigUint,
}

impl Node {
    pub fn root() -> Self {
        Node { digits: Vec::new(), a: BigUint::zero(), q: BigUint::one() }
    }

    pub fn from_digits(digits: &[u64]) -> Self {
        let mut node = Node::root();
        for &d in digits {
            node = node.child(d);
        }
        node
    }

    pub fn child(&self, c: u64) -> Node {
        let cc = BigUint::from(c) * BigUint::from(c - 1);
        let mut digits = self.digits.clone();
        digits.push(c);
        Node { digits, a: &self.a * &cc + BigUint::from(c - 1), q: &self.q * cc }
    }

    /// `J = [ (a c_hi + 1)/(Q c_hi), (a (c_lo - 1) + 1)/(Q (c_lo - 1)) ]`
    pub fn fundamental(&self, (lo, hi): (u64, u64)) -> (BigRational, BigRational) {
        let left = BigRational::new(
            BigInt::from(&self.a * BigUint::from(hi) + BigUint::one()),
            BigInt::from(&self.q * BigUint::from(hi)),
        );
        let right = BigRational::new(
            BigInt::from(&self.a * BigUint::from(lo - 1) + BigUint::one()),
            BigInt::from(&self.q * BigUint::from(lo - 1)),
        );
        (left, right)
    }

    #[cfg(test)]
    pub fn cylinder_length(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.q.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FundamentalInterval {
    pub word: LurothWord,
    #[serde(serialize_with = "ser_rational")]
    pub lower: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub upper: BigRational,
    pub mass: f64,
    pub mass_lower: f64,
    pub mass_upper: f64,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl FundamentalInterval {
    pub fn length(&self) -> BigRational {
        &self.upper - &self.lower
    }
}

/// The closure of the union of the admissible child cylinders of `word`.
pub fn fundamental_interval(params: &CantorParams, word: &LurothWord) -> Result<FundamentalInterval> {
    let range = admissible_children(params, word)?;
    let node = Node::from_digits(word.digits());
    let (lower, upper) = node.fundamental(range);
    let mu = params.ln_mass_unchecked(word.digits()).exp();
    Ok(FundamentalInterval { word: word.clone(), lower, upper, mass: mu.mid(), mass_lower: mu.lo, mass_upper: mu.hi })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapMode {
    /// sort all level-`n` fundamental intervals
    Exhaustive,
    /// compare with the two neighbouring words in the left-to-right order
    Neighbors,
}

pub const GAP_BUDGET: u64 = 2_000_000;

/// Words of a level are ordered left to right by comparing digits, the
/// larger digit lying further left. These are the adjacent words.
fn neighbor_words(params: &CantorParams, digits: &[u64]) -> (Option<Vec<u64>>, Option<Vec<u64>>) {
    let ranges: Vec<(u64, u64)> = (1..=digits.len() as u64).map(|p| params.range_at(p)).collect();
    let mut left = None;
    if let Some(i) = (0..digits.len()).rev().find(|&i| digits[i] < ranges[i].1) {
        let mut w = digits.to_vec();
        w[i] += 1;
        for j in i + 1..w.len() {
            w[j] = ranges[j].0;
        }
        left = Some(w);
    }
    let mut right = None;
    if let Some(i) = (0..digits.len()).rev().find(|&i| digits[i] > ranges[i].0) {
        let mut w = digits.to_vec();
        w[i] -= 1;
        for j in i + 1..w.len() {
            w[j] = ranges[j].1;
        }
        right = Some(w);
    }
    (left, right)
}

fn level_size(params: &CantorParams, n: usize) -> u64 {
    (1..=n as u64).fold(1u64, |acc, p| acc.saturating_mul(params.count_at(p)))
}

/// Distance from `J_n(word)` to the nearest other fundamental interval of
/// the same level; `None` when the level has a single interval.
pub fn gap(params: &CantorParams, word: &LurothWord, mode: GapMode) -> Result<Option<BigRational>> {
    let range = admissible_children(params, word)?;
    let n = word.len();
    let node = Node::from_digits(word.digits());
    let (lo, hi) = node.fundamental(range);
    match mode {
        GapMode::Neighbors => {
            let (left, right) = neighbor_words(params, word.digits());
            let mut best: Option<BigRational> = None;
            if let Some(l) = left {
                let (_, lhi) = Node::from_digits(&l).fundamental(range);
                best = Some(&lo - lhi);
            }
            if let Some(r) = right {
                let (rlo, _) = Node::from_digits(&r).fundamental(range);
                let g = rlo - &hi;
                best = Some(match best {
                    Some(b) if b < g => b,
                    _ => g,
                });
            }
            Ok(best)
        }
        GapMode::Exhaustive => {
            let size = level_size(params, n);
            if size > GAP_BUDGET {
                return Err(Error::resource(
                    format!("level {n} has {size} words, over the enumeration budget {GAP_BUDGET}; use neighbour mode"),
                    None,
                ));
            }
            let mut best: Option<BigRational> = None;
            checks::for_each_word(params, n, &mut |other: &Node| {
                if other.digits == word.digits() {
                    return;
                }
                let (olo, ohi) = other.fundamental(range);
                let d = if ohi < lo {
                    &lo - &ohi
                } else if olo > hi {
                    &olo - &hi
                } else {
                    BigRational::zero()
                };
                if best.as_ref().is_none_or(|b| &d < b) {
                    best = Some(d);
                }
            });
            Ok(best)
        }
    }
}

pub(crate) fn rational_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        let p = default_params().unwrap();
        assert_eq!(p.n, 2);
        assert_eq!(p.n_k, vec![5, 13]);
        assert!(p.relation_residual < 1e-12);
        assert!(p.a > 1.0 && p.a < 2.0);
        // t = (1,1): A = B^s
        assert!((p.a - 2f64.powf(p.s)).abs() < 1e-12);
        assert_eq!(p.position(5), Position::First(0));
        assert_eq!(p.position(6), Position::Second(0));
        assert_eq!(p.position(7), Position::Free);
        assert_eq!(p.max_level(), 14);
    }

    #[test]
    fn rejects_small_m() {
        let r = derive_params(RealParam::parse("2").unwrap(), WeightVector::parse("1,1").unwrap(), 4, None, vec![2, 3]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn node_cylinders_match_core() {
        let w = LurothWord::new(vec![3, 2, 7]).unwrap();
        let c = crate::expansion::cylinder_of(&w).unwrap();
        let node = Node::from_digits(w.digits());
        assert_eq!(BigRational::new(BigInt::from(node.a.clone()), BigInt::from(node.q.clone())), c.lower);
        assert_eq!(node.cylinder_length(), c.length());
    }

    #[test]
    fn neighbours_are_adjacent() {
        let p = default_params().unwrap();
        let (l, r) = neighbor_words(&p, &[2, 3]);
        assert_eq!(l, Some(vec![2, 4]));
        assert_eq!(r, Some(vec![2, 2]));
        let (l, r) = neighbor_words(&p, &[3, 2]);
        assert_eq!(l, Some(vec![3, 3]));
        assert_eq!(r, Some(vec![2, 10]));
        let (l, _) = neighbor_words(&p, &[10, 10]);
        assert_eq!(l, None);
    }
}
