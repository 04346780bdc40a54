//! Measure of a finite union of window events
//! `{d_n^{t_0} ⋯ d_{n+m-1}^{t_{m-1}} ≥ Ψ(n)}`, `N1 ≤ n ≤ N2`, by dynamic
//! programming over the last `m-1` digits.
//!
//! Digits up to the cap are tracked exactly. Larger digits are grouped into
//! cells with geometrically growing ends, up to a digit `D*` past which every
//! window containing it fires; the rest is one cell `[D*, ∞)`. Two passes
//! place every grouped older digit at the low or the high end of its cell,
//! which bounds the avoidance probability from above and from below. The
//! newest digit of each window is always resolved exactly inside its cell.

use serde::Serialize;

use super::psi::PsiSpec;
use crate::error::{Error, Result};
use crate::interval::{sum_pairwise, Interval};
use crate::threshold::{exact_product_ge, least_digit, ln_digit, Target, INF_DIGIT};
use crate::weights::WeightVector;

#[derive(Clone, Debug)]
pub struct DpOptions {
    pub digit_cap: u64,
    /// Growth ratio of the cells above the cap; `None` lumps everything
    /// between the cap and `D*` into one cell.
    pub bucket_ratio: Option<f64>,
    pub state_budget: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { digit_cap: 4096, bucket_ratio: Some(1.0625), state_budget: 4_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpResult {
    pub lower: f64,
    pub upper: f64,
    pub cells: usize,
    pub states: usize,
}

impl DpResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

const MAX_STAR: u128 = 1 << 100;

#[derive(Clone, Copy, Debug)]
struct Cell {
    lo: u128,
    /// exclusive; `INF_DIGIT` for the last cell
    hi: u128,
    mass: Interval,
}

fn tail(lo: u128) -> Interval {
    if lo == INF_DIGIT {
        Interval::ZERO
    } else {
        Interval::from_u128(lo - 1).recip()
    }
}

fn cell_mass(lo: u128, hi: u128) -> Interval {
    if hi == INF_DIGIT {
        tail(lo)
    } else {
        (tail(lo) - tail(hi)).max(Interval::ZERO)
    }
}

fn build_cells(cap: u64, d_star: u128, ratio: Option<f64>) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut lo: u128 = 2;
    let exact_end = (cap as u128 + 1).min(d_star);
    while lo < exact_end {
        cells.push(Cell { lo, hi: lo + 1, mass: cell_mass(lo, lo + 1) });
        lo += 1;
    }
    while lo < d_star {
        let hi = match ratio {
            Some(r) => (((lo as f64) * r).ceil() as u128).max(lo + 1).min(d_star),
            None => d_star,
        };
        cells.push(Cell { lo, hi, mass: cell_mass(lo, hi) });
        lo = hi;
    }
    cells.push(Cell { lo, hi: INF_DIGIT, mass: tail(lo) });
    cells
}

/// Mass of the digits in `cell` lying below `d`.
fn avoid_in_cell(cell: &Cell, d: u128) -> Interval {
    if d <= cell.lo {
        Interval::ZERO
    } else if cell.hi != INF_DIGIT && d >= cell.hi {
        cell.mass
    } else {
        (tail(cell.lo) - tail(d)).max(Interval::ZERO)
    }
}

struct Window<'a> {
    ln_target: Interval,
    target: super::psi::PsiTarget<'a>,
    always: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    /// older digits at the bottom of their cell: avoidance overestimated
    Low,
    /// older digits at the top of their cell: avoidance underestimated
    High,
}

struct Reps {
    ln: Vec<Interval>,
    digit: Vec<u128>,
}

fn reps(cells: &[Cell], side: Side) -> Reps {
    let mut ln = Vec::with_capacity(cells.len());
    let mut digit = Vec::with_capacity(cells.len());
    for c in cells {
        let d = match side {
            Side::Low => c.lo,
            Side::High if c.hi == INF_DIGIT => INF_DIGIT,
            Side::High => c.hi - 1,
        };
        digit.push(d);
        ln.push(if d == INF_DIGIT { Interval::point(f64::INFINITY) } else { ln_digit(d) });
    }
    Reps { ln, digit }
}

fn cell_index(cells: &[Cell], d: u128) -> usize {
    if d == INF_DIGIT {
        return cells.len();
    }
    cells.partition_point(|c| c.lo <= d) - 1
}

pub fn window_event_measure_dp(
    psi: &PsiSpec,
    t: &WeightVector,
    n_range: (u64, u64),
    digit_cap: u64,
) -> Result<DpResult> {
    let opts = DpOptions { digit_cap, ..DpOptions::default() };
    window_event_measure_dp_with(psi, t, n_range, &opts)
}

pub fn window_event_measure_dp_with(
    psi: &PsiSpec,
    t: &WeightVector,
    (n1, n2): (u64, u64),
    opts: &DpOptions,
) -> Result<DpResult> {
    if n1 < 1 || n2 < n1 {
        return Err(Error::validation(format!("need 1 ≤ N1 ≤ N2, got [{n1}, {n2}]")));
    }
    if opts.digit_cap < 4 {
        return Err(Error::validation("digit cap must be at least 4"));
    }
    if let Some(r) = opts.bucket_ratio {
        if !(r > 1.0) {
            return Err(Error::validation("bucket ratio must exceed 1"));
        }
    }
    let m = t.m();
    let mut windows = Vec::with_capacity((n2 - n1 + 1) as usize);
    let mut ln_max = f64::NEG_INFINITY;
    for n in n1..=n2 {
        let target = psi.target(n)?;
        let ln_target = target.ln();
        let always = psi.is_one_at(n) || psi.below_minimal_product(n, t.sum())?;
        if always {
            // one window that surely fires settles the union
            return Ok(DpResult { lower: 1.0, upper: 1.0, cells: 0, states: 0 });
        }
        ln_max = ln_max.max(ln_target.hi);
        windows.push(Window { ln_target, target, always });
    }

    // every window holding a digit ≥ D* fires
    let y = (ln_max / t.t_min()).exp();
    let d_star = if y.is_finite() && y < MAX_STAR as f64 { (y.ceil() as u128 + 1).max(3) } else { MAX_STAR };
    let cells = build_cells(opts.digit_cap, d_star, opts.bucket_ratio);
    let total = sum_pairwise(&cells.iter().map(|c| c.mass).collect::<Vec<_>>());
    if !total.contains(1.0) {
        return Err(Error::Internal(format!("cell masses sum to {total:?}, not 1")));
    }
    let k = cells.len();
    let states = k.checked_pow((m - 1) as u32).filter(|&s| s <= opts.state_budget).ok_or_else(|| {
        Error::resource(
            format!(
                "{k} digit cells give {k}^{} states, over the budget of {}; use a smaller digit cap",
                m - 1,
                opts.state_budget
            ),
            None,
        )
    })?;

    let avoid_hi = run(&cells, &windows, t, Side::Low, states)?;
    let avoid_lo = run(&cells, &windows, t, Side::High, states)?;
    let lower = (Interval::ONE - Interval::point(avoid_hi.hi)).lo.clamp(0.0, 1.0);
    let upper = (Interval::ONE - Interval::point(avoid_lo.lo)).hi.clamp(0.0, 1.0);
    Ok(DpResult { lower, upper: upper.max(lower), cells: k, states })
}

/// Probability that no window fires, with older digits placed per `side`.
fn run(cells: &[Cell], windows: &[Window<'_>], t: &WeightVector, side: Side, states: usize) -> Result<Interval> {
    let m = t.m();
    let k = cells.len();
    let rep = reps(cells, side);
    let w_last = t.get(m - 1);
    let weights = t.exact_all();

    // digits of the state, oldest first, decoded in mixed radix
    let decode = |mut s: usize, out: &mut Vec<usize>| {
        out.clear();
        out.resize(m - 1, 0);
        for i in (0..m - 1).rev() {
            out[i] = s % k;
            s /= k;
        }
    };

    let mut cur = vec![Interval::ZERO; states];
    let mut buf = Vec::new();
    for (s, slot) in cur.iter_mut().enumerate() {
        decode(s, &mut buf);
        let mut p = Interval::ONE;
        for &c in &buf {
            p = p * cells[c].mass;
        }
        *slot = p;
    }

    let mut full = vec![Interval::ZERO; k + 1];
    let mut digits = vec![0u128; m];
    for win in windows {
        debug_assert!(!win.always);
        let threshold = |ln_prefix: Interval, older: &[u128]| -> u128 {
            let exact = |d: u128| digits_with(older, d, |ds| exact_product_ge(ds, weights, &win.target));
            let (lo, hi) = least_digit(ln_prefix, w_last, win.ln_target, Some(&exact));
            match side {
                Side::Low => hi,
                Side::High => lo,
            }
        };

        if m == 1 {
            let d = threshold(Interval::ZERO, &[]);
            let avoid = sum_pairwise(&cells.iter().map(|c| avoid_in_cell(c, d)).collect::<Vec<_>>());
            cur[0] = cur[0] * avoid;
            continue;
        }

        let prefixes = states / k;
        let mut next = vec![Interval::ZERO; states];
        for p in 0..prefixes {
            full.iter_mut().for_each(|x| *x = Interval::ZERO);
            for c1 in 0..k {
                let s = c1 * prefixes + p;
                let v = cur[s];
                if v.hi == 0.0 {
                    continue;
                }
                decode(s, &mut buf);
                let mut ln_prefix = Interval::ZERO;
                for (i, &c) in buf.iter().enumerate() {
                    ln_prefix = ln_prefix + rep.ln[c] * t.get(i);
                    digits[i] = rep.digit[c];
                }
                let d = threshold(ln_prefix, &digits[..m - 1]);
                let kappa = cell_index(cells, d);
                full[kappa] = full[kappa] + v;
                if kappa < k {
                    let part = avoid_in_cell(&cells[kappa], d);
                    next[p * k + kappa] = next[p * k + kappa] + v * part;
                }
            }
            // the newest digit avoids when it sits in a cell below κ
            let mut above = Interval::ZERO;
            for c in (0..k).rev() {
                above = above + full[c + 1];
                if above.hi > 0.0 {
                    next[p * k + c] = next[p * k + c] + above * cells[c].mass;
                }
            }
        }
        cur = next;
    }
    Ok(sum_pairwise(&cur))
}

fn digits_with<R>(older: &[u128], d: u128, f: impl FnOnce(&[u128]) -> R) -> R {
    let mut ds = Vec::with_capacity(older.len() + 1);
    ds.extend_from_slice(older);
    ds.push(d);
    f(&ds)
}
