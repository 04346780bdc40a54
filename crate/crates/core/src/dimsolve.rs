//! Certified solvers for dimension equations
//! `g(s) = Σ_{d ≥ 2} (d(d-1))^{-s} B^{-e(s)} = 1`.
//!
//! `g` is evaluated as an interval: an outward-rounded partial sum up to a
//! cutoff `D` plus a bracket for the tail. With `h(x) = (x(x-1))^{-s}`
//! convex and decreasing, the tail from `a = D + 1` satisfies
//! `∫_a^∞ h + h(a)/2 ≤ Σ_{d ≥ a} h(d) ≤ ∫_{a-1/2}^∞ h`, and the integrals
//! are bracketed in `u = x - 1/2` using
//! `u^{-2s} (1 + s ε) ≤ (u² - 1/4)^{-s} ≤ u^{-2s} (1 + κ ε)`, `ε = 1/(4u²)`.

use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::{sum_pairwise, Interval};
use crate::measure::{exponents, GrowthExponents, Provenance, PsiSpec};
use crate::weights::WeightVector;

/// Left end of the search bracket for sums over all digits.
pub const BRACKET_EPS: f64 = 1e-6;
const CUTOFFS: [u64; 4] = [1 << 12, 1 << 16, 1 << 20, 1 << 24];
const MAX_ITER: u32 = 400;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DimKind {
    /// `e(s) = s`
    Single,
    /// `e(s) = 2s`
    PairUnit,
    /// `e(s) = f_{t0,t1}(s)`
    PairWeighted { t0: f64, t1: f64 },
    /// `e(s)` from the weight recursion over `weights`
    Conjecture { weights: Vec<f64> },
}

impl DimKind {
    pub fn parse(name: &str, t: Option<&WeightVector>) -> Result<Self> {
        let need_t = || t.ok_or_else(|| Error::validation(format!("kind {name} needs weights")));
        Ok(match name {
            "single" => DimKind::Single,
            "pair_unit" => DimKind::PairUnit,
            "pair_weighted" => {
                let t = need_t()?;
                if t.m() != 2 {
                    return Err(Error::validation("pair_weighted needs exactly two weights"));
                }
                DimKind::PairWeighted { t0: t.get(0), t1: t.get(1) }
            }
            "conjecture" => DimKind::Conjecture { weights: need_t()?.as_f64().to_vec() },
            other => return Err(Error::validation(format!("unknown dimension kind '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            DimKind::Single => "single",
            DimKind::PairUnit => "pair_unit",
            DimKind::PairWeighted { .. } => "pair_weighted",
            DimKind::Conjecture { .. } => "conjecture",
        }
    }

    fn validate(&self) -> Result<()> {
        let ws: &[f64] = match self {
            DimKind::PairWeighted { t0, t1 } => &[*t0, *t1],
            DimKind::Conjecture { weights } => weights,
            _ => &[],
        };
        if let DimKind::Conjecture { weights } = self {
            if weights.is_empty() {
                return Err(Error::validation("conjecture kind needs at least one weight"));
            }
        }
        if ws.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::validation("weights must be positive"));
        }
        Ok(())
    }

    /// Enclosure of `e(s)`.
    pub fn exponent(&self, s: Interval) -> Interval {
        match self {
            DimKind::Single => s,
            DimKind::PairUnit => s * 2.0,
            DimKind::PairWeighted { t0, t1 } => f_weighted_iv(*t0, *t1, s),
            DimKind::Conjecture { weights } => f_recursive_iv(weights, s),
        }
    }
}

impl fmt::Display for DimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// all digits, with a certified tail bound
    CertifiedTail,
    /// digits `2..=D` only
    Cutoff(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimProblem {
    pub kind: DimKind,
    pub b: f64,
    pub truncation: Truncation,
    pub tol: f64,
}

impl DimProblem {
    pub fn new(kind: DimKind, b: f64, tol: f64) -> Self {
        DimProblem { kind, b, truncation: Truncation::CertifiedTail, tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimSolution {
    pub s_lower: f64,
    pub s_upper: f64,
    /// `|g(mid) - 1|` at the bracket midpoint
    pub residual: f64,
    pub iterations: u32,
    /// Largest digit summed explicitly in the last evaluation.
    pub cutoff: u64,
}

impl DimSolution {
    pub fn mid(&self) -> f64 {
        0.5 * (self.s_lower + self.s_upper)
    }

    pub fn width(&self) -> f64 {
        self.s_upper - self.s_lower
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain(format!("s = {s} is outside (0, 1]")));
    }
    Ok(())
}

fn check_weights(t0: f64, t1: f64) -> Result<()> {
    if !(t0 > 0.0 && t1 > 0.0 && t0.is_finite() && t1.is_finite()) {
        return Err(Error::domain("weights must be positive"));
    }
    Ok(())
}

/// `f_{t0,t1}(s) = s² / (t0 t1 max{s/t1 + (1-s)/t0, s/t0})`.
pub fn f_weighted(t0: f64, t1: f64, s: f64) -> Result<f64> {
    check_weights(t0, t1)?;
    check_s(s)?;
    Ok(s * s / (t0 * t1 * (s / t1 + (1.0 - s) / t0).max(s / t0)))
}

fn f_weighted_iv(t0: f64, t1: f64, s: Interval) -> Interval {
    let a = Interval::point(t0);
    let b = Interval::point(t1);
    let m = (s / b + (Interval::ONE - s) / a).max(s / a);
    s * s / (a * b * m)
}

/// `f_{t_0}(s) = s/t_0`, then
/// `f_{t_0..t_j}(s) = s f / (t_j f + max{0, s - t_j (2s-1) / max_{i<j} t_i})`
/// with `f = f_{t_0..t_{j-1}}(s)`.
pub fn f_recursive(weights: &[f64], s: f64) -> Result<f64> {
    if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::domain("weights must be non-empty and positive"));
    }
    check_s(s)?;
    let mut f = s / weights[0];
    let mut top = weights[0];
    for &tj in &weights[1..] {
        let gap = (s - tj * (2.0 * s - 1.0) / top).max(0.0);
        f = s * f / (tj * f + gap);
        top = top.max(tj);
    }
    Ok(f)
}

fn f_recursive_iv(weights: &[f64], s: Interval) -> Interval {
    let mut f = s / Interval::point(weights[0]);
    let mut top = weights[0];
    for &tj in &weights[1..] {
        let t = Interval::point(tj);
        let gap = (s - t * (s * 2.0 - Interval::ONE) / Interval::point(top)).max(Interval::ZERO);
        f = s * f / (t * f + gap);
        top = top.max(tj);
    }
    f
}

/// Logarithms of `d(d-1)` for `d = 2..=D`, grown on demand.
#[derive(Default)]
struct LnTable {
    ln: Vec<Interval>,
}

impl LnTable {
    fn upto(&mut self, cutoff: u64) -> &[Interval] {
        let need = (cutoff - 1) as usize;
        while self.ln.len() < need {
            let d = self.ln.len() as u128 + 2;
            self.ln.push(Interval::from_u128(d * (d - 1)).ln());
        }
        &self.ln[..need]
    }
}

fn partial_zeta(ln: &[Interval], s: Interval) -> Interval {
    let terms: Vec<Interval> = ln.iter().map(|&l| (-(s * l)).exp()).collect();
    sum_pairwise(&terms)
}

/// Bracket for `Σ_{d > cutoff} (d(d-1))^{-s}`, `s > 1/2`.
fn tail_bracket(cutoff: u64, s: Interval) -> Interval {
    let a = Interval::point(cutoff as f64 + 1.0);
    let half = Interval::point(0.5);
    let two_s = s * 2.0;
    let p = two_s - Interval::ONE;
    // ∫_{c}^∞ with c' = c - 1/2, plus a correction with coefficient `k`
    let integral = |c: Interval, k: Interval| {
        let cp = c - half;
        let main = (-(p * cp.ln())).exp() / p;
        let corr = k * Interval::point(0.25) * (-((two_s + Interval::ONE) * cp.ln())).exp() / (two_s + Interval::ONE);
        main + corr
    };
    let h_a = (-(s * (a * (a - Interval::ONE)).ln())).exp();
    let lower = integral(a, s) + h_a * half;
    let c = a - half;
    let cp = c - half;
    let eps0 = Interval::ONE / (cp * cp * 4.0);
    let kappa = ((-(s * (Interval::ONE - eps0).ln())).exp() - Interval::ONE) / eps0;
    let upper = integral(c, kappa);
    Interval::new(lower.lo, upper.hi)
}

/// Evaluates `g` for one problem, caching logarithm tables.
pub struct GEvaluator {
    kind: DimKind,
    ln_b: Interval,
    truncation: Truncation,
    table: LnTable,
    level: usize,
}

impl GEvaluator {
    pub fn new(kind: DimKind, b: f64, truncation: Truncation) -> Result<Self> {
        kind.validate()?;
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!("B = {b} must be positive and finite")));
        }
        if let Truncation::Cutoff(d) = truncation {
            if d < 2 {
                return Err(Error::domain("cutoff must be at least 2"));
            }
            if d > 1 << 26 {
                return Err(Error::resource(format!("cutoff {d} is over the budget of 2^26"), None));
            }
        }
        Ok(GEvaluator { kind, ln_b: Interval::point(b).ln(), truncation, table: LnTable::default(), level: 0 })
    }

    pub fn cutoff(&self) -> u64 {
        match self.truncation {
            Truncation::CertifiedTail => CUTOFFS[self.level],
            Truncation::Cutoff(d) => d,
        }
    }

    /// Moves to the next cutoff; false when already at the largest.
    fn refine(&mut self) -> bool {
        if self.truncation == Truncation::CertifiedTail && self.level + 1 < CUTOFFS.len() {
            self.level += 1;
            true
        } else {
            false
        }
    }

    pub fn eval(&mut self, s: f64) -> Result<Interval> {
        let si = Interval::point(s);
        match self.truncation {
            Truncation::CertifiedTail => {
                if !(s > 0.5) {
                    return Err(Error::domain(format!("the full sum diverges at s = {s} ≤ 1/2")));
                }
                if s > 1.0 {
                    return Err(Error::domain(format!("s = {s} is above 1")));
                }
            }
            Truncation::Cutoff(d) => {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::domain(format!("s = {s} is outside [0, 1]")));
                }
                if s == 0.0 {
                    return Ok(Interval::point((d - 1) as f64));
                }
            }
        }
        let cutoff = self.cutoff();
        let mut z = partial_zeta(self.table.upto(cutoff), si);
        if self.truncation == Truncation::CertifiedTail {
            z = z + tail_bracket(cutoff, si);
        }
        let weight = (-(self.kind.exponent(si) * self.ln_b)).exp();
        Ok(z * weight)
    }

    /// Certified comparison of `g(s)` with 1: `Less` means `g(s) ≥ 1`
    /// (`s` is at or left of the root), `Greater` means `g(s) ≤ 1`.
    /// Escalates the cutoff when undecided.
    fn side(&mut self, s: f64) -> Result<(Option<Ordering>, Interval)> {
        loop {
            let g = self.eval(s)?;
            if g.lo >= 1.0 {
                return Ok((Some(Ordering::Less), g));
            }
            if g.hi <= 1.0 {
                return Ok((Some(Ordering::Greater), g));
            }
            if !self.refine() {
                return Ok((None, g));
            }
        }
    }
}

/// Enclosure of `g(s)` for the given kind and base.
pub fn g_sum(kind: &DimKind, b: f64, s: f64, truncation: Truncation) -> Result<Interval> {
    let mut ev = GEvaluator::new(kind.clone(), b, truncation)?;
    if truncation == Truncation::CertifiedTail {
        ev.level = 1;
    }
    ev.eval(s)
}

/// `g` with a certified tail from a caller-chosen cutoff.
pub fn g_sum_with_cutoff(kind: &DimKind, b: f64, s: f64, cutoff: u64) -> Result<Interval> {
    if !(s > 0.5 && s <= 1.0) {
        return Err(Error::domain(format!("the full sum needs 1/2 < s ≤ 1, got {s}")));
    }
    let mut ev = GEvaluator::new(kind.clone(), b, Truncation::Cutoff(cutoff))?;
    let si = Interval::point(s);
    let z = partial_zeta(ev.table.upto(cutoff), si) + tail_bracket(cutoff, si);
    Ok(z * (-(kind.exponent(si) * ev.ln_b)).exp())
}

fn secant(lo: f64, g_lo: f64, hi: f64, g_hi: f64) -> Option<f64> {
    // on log g, which is closer to linear than g near s = 1/2
    let (a, b) = (g_lo.ln(), g_hi.ln());
    if !(a.is_finite() && b.is_finite()) || a <= b {
        return None;
    }
    Some(lo + (hi - lo) * a / (a - b))
}

pub fn solve(problem: &DimProblem) -> Result<DimSolution> {
    let DimProblem { kind, b, truncation, tol } = problem;
    if !(*b > 1.0) {
        return Err(Error::domain(format!("B = {b} must exceed 1")));
    }
    if !(*tol > 0.0) {
        return Err(Error::validation("tolerance must be positive"));
    }
    if !b.is_finite() {
        return Err(Error::domain("B must be finite"));
    }
    let mut ev = GEvaluator::new(kind.clone(), *b, *truncation)?;
    let mut iterations = 0;

    let (mut lo, mut g_lo) = match truncation {
        Truncation::Cutoff(_) => (0.0, ev.eval(0.0)?),
        Truncation::CertifiedTail => {
            let lo = 0.5 + BRACKET_EPS;
            match ev.side(lo)? {
                (Some(Ordering::Less), g) => (lo, g),
                _ => {
                    // the root is in (1/2, lo]
                    if *tol >= lo - 0.5 {
                        return Ok(DimSolution {
                            s_lower: 0.5,
                            s_upper: lo,
                            residual: f64::NAN,
                            iterations: 1,
                            cutoff: ev.cutoff(),
                        });
                    }
                    return Err(Error::resource(
                        "the root lies within 1e-6 of 1/2; tolerance not reachable",
                        Some((0.5, lo)),
                    ));
                }
            }
        }
    };
    let (mut hi, mut g_hi) = match ev.side(1.0)? {
        (Some(Ordering::Greater), g) => (1.0, g),
        (_, g) => {
            return Err(Error::Internal(format!("g(1) = [{}, {}] is not certified below 1", g.lo, g.hi)));
        }
    };

    let mut force_bisect = false;
    while hi - lo > *tol {
        iterations += 1;
        if iterations > MAX_ITER {
            return Err(Error::resource("iteration budget exhausted", Some((lo, hi))));
        }
        let width = hi - lo;
        let inner = (lo + width / 64.0, hi - width / 64.0);
        let x = match secant(lo, g_lo.mid(), hi, g_hi.mid()) {
            Some(x) if !force_bisect && x > inner.0 && x < inner.1 => x,
            _ => lo + width / 2.0,
        };
        let (side, g) = ev.side(x)?;
        match side {
            Some(Ordering::Less) => {
                lo = x;
                g_lo = g;
                probe(&mut ev, x + tol / 2.0, &mut lo, &mut g_lo, &mut hi, &mut g_hi)?;
            }
            Some(_) => {
                hi = x;
                g_hi = g;
                probe(&mut ev, x - tol / 2.0, &mut lo, &mut g_lo, &mut hi, &mut g_hi)?;
            }
            None => {
                let a = probe(&mut ev, x - tol / 4.0, &mut lo, &mut g_lo, &mut hi, &mut g_hi)?;
                let b = probe(&mut ev, x + tol / 4.0, &mut lo, &mut g_lo, &mut hi, &mut g_hi)?;
                if !a && !b {
                    return Err(Error::resource(
                        format!("g cannot be separated from 1 near s = {x} at this precision"),
                        Some((lo, hi)),
                    ));
                }
            }
        }
        force_bisect = hi - lo > 0.5 * width;
    }
    let mid = 0.5 * (lo + hi);
    let residual = if mid > 0.0 && (mid > 0.5 || matches!(truncation, Truncation::Cutoff(_))) {
        (ev.eval(mid)?.mid() - 1.0).abs()
    } else {
        f64::NAN
    };
    Ok(DimSolution { s_lower: lo, s_upper: hi, residual, iterations, cutoff: ev.cutoff() })
}

/// Evaluates at `x` if it lies strictly inside the bracket and tightens
/// the bracket when the side is decided. Returns whether it decided.
fn probe(
    ev: &mut GEvaluator,
    x: f64,
    lo: &mut f64,
    g_lo: &mut Interval,
    hi: &mut f64,
    g_hi: &mut Interval,
) -> Result<bool> {
    if !(x > *lo && x < *hi) {
        return Ok(false);
    }
    match ev.side(x)? {
        (Some(Ordering::Less), g) => {
            *lo = x;
            *g_lo = g;
            Ok(true)
        }
        (Some(_), g) => {
            *hi = x;
            *g_hi = g;
            Ok(true)
        }
        (None, _) => Ok(false),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedRow {
    pub n: u64,
    pub s_lower: f64,
    pub s_upper: f64,
}

/// Roots `s_n` of the equations truncated at digit `n`.
pub fn solve_truncated_sequence(kind: &DimKind, b: f64, n_list: &[u64], tol: f64) -> Result<Vec<TruncatedRow>> {
    n_list
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(Error::validation(format!("truncation n = {n} is below 2")));
            }
            let sol = solve(&DimProblem { kind: kind.clone(), b, truncation: Truncation::Cutoff(n), tol })?;
            Ok(TruncatedRow { n, s_lower: sol.s_lower, s_upper: sol.s_upper })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimStatus {
    Theorem,
    Conjecture,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionResult {
    pub lower: f64,
    pub upper: f64,
    pub status: DimStatus,
    pub exponents: GrowthExponents,
    pub note: Option<String>,
}

impl DimensionResult {
    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

pub const DIMENSION_TOL: f64 = 1e-10;

/// The Hausdorff dimension of the weighted limsup set for `Ψ` and `t`.
pub fn dimension(psi: &PsiSpec, t: &WeightVector) -> Result<DimensionResult> {
    let exps = exponents(psi)?;
    let mut out = dimension_from_exponents(&exps, t)?;
    if exps.provenance == Provenance::Estimated {
        if let Some((b_lo, b_hi)) = exps.big_b_range {
            let at_hi = dimension_from_exponents(&GrowthExponents { big_b: b_hi, ..exps.clone() }, t)?;
            out.lower = out.lower.min(at_hi.lower);
            out.upper = out.upper.max(at_hi.upper);
            out.note = Some(format!(
                "B estimated over the last half of a {}-entry table, range [{b_lo}, {b_hi}]",
                exps.horizon.unwrap_or(0)
            ));
        }
    }
    Ok(out)
}

/// Dimension from given exponents `B`, `b` (both in `[1, ∞]`).
pub fn dimension_from_exponents(exps: &GrowthExponents, t: &WeightVector) -> Result<DimensionResult> {
    let (big_b, small_b) = (exps.big_b, exps.small_b);
    if !(big_b >= 1.0) || !(small_b >= 1.0) {
        return Err(Error::validation("exponents must lie in [1, ∞]"));
    }
    let closed = |v: f64| DimensionResult {
        lower: v,
        upper: v,
        status: DimStatus::ClosedForm,
        exponents: exps.clone(),
        note: None,
    };
    if big_b == 1.0 {
        return Ok(closed(1.0));
    }
    if big_b == f64::INFINITY {
        return Ok(closed(if small_b == f64::INFINITY { 0.0 } else { 1.0 / (small_b + 1.0) }));
    }
    let (problem, status) = match t.m() {
        1 => (DimProblem::new(DimKind::Single, big_b.powf(1.0 / t.get(0)), DIMENSION_TOL), DimStatus::Theorem),
        2 => (
            DimProblem::new(DimKind::PairWeighted { t0: t.get(0), t1: t.get(1) }, big_b, DIMENSION_TOL),
            DimStatus::Theorem,
        ),
        _ => (
            DimProblem::new(DimKind::Conjecture { weights: t.as_f64().to_vec() }, big_b, DIMENSION_TOL),
            DimStatus::Conjecture,
        ),
    };
    let sol = solve(&problem)?;
    Ok(DimensionResult { lower: sol.s_lower, upper: sol.s_upper, status, exponents: exps.clone(), note: None })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub b: f64,
    pub s_lower: f64,
    pub s_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub rows: Vec<ScanRow>,
    pub refined_rows: Vec<ScanRow>,
    /// non-increasing in `B` on both grids
    pub monotone: bool,
    pub max_jump: f64,
    pub refined_max_jump: f64,
}

impl ContinuityReport {
    pub fn jump_ratio(&self) -> f64 {
        self.refined_max_jump / self.max_jump
    }
}

pub fn scan(kind: &DimKind, b_grid: &[f64], tol: f64) -> Result<Vec<ScanRow>> {
    if b_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("B grid must be increasing"));
    }
    b_grid
        .iter()
        .map(|&b| {
            let sol = solve(&DimProblem::new(kind.clone(), b, tol))?;
            Ok(ScanRow { b, s_lower: sol.s_lower, s_upper: sol.s_upper })
        })
        .collect()
}

fn max_jump(rows: &[ScanRow]) -> f64 {
    rows.windows(2)
        .map(|w| (w[0].s_upper - w[1].s_lower).abs().max((w[0].s_lower - w[1].s_upper).abs()))
        .fold(0.0, f64::max)
}

fn monotone(rows: &[ScanRow]) -> bool {
    rows.windows(2).all(|w| w[1].s_lower <= w[0].s_upper)
}

/// Solves along `b_grid` and along the grid with midpoints inserted, and
/// compares the largest jumps between neighbours.
pub fn continuity_scan(kind: &DimKind, b_grid: &[f64], tol: f64) -> Result<ContinuityReport> {
    if b_grid.len() < 2 {
        return Err(Error::validation("B grid needs at least two points"));
    }
    let rows = scan(kind, b_grid, tol)?;
    let mut fine = Vec::with_capacity(2 * b_grid.len());
    for w in b_grid.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    fine.push(*b_grid.last().expect("non-empty"));
    let refined_rows = scan(kind, &fine, tol)?;
    Ok(ContinuityReport {
        monotone: monotone(&rows) && monotone(&refined_rows),
        max_jump: max_jump(&rows),
        refined_max_jump: max_jump(&refined_rows),
        rows,
        refined_rows,
    })
}
