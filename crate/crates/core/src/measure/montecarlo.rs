//! Monte Carlo over i.i.d. Lüroth digit streams.
//!
//! Digits are drawn exactly: with `k` uniform on `{1, …, 2^53}` and
//! `u = k / 2^53`, the first digit of `u` is `⌊2^53 / k⌋ + 1`, so
//! `P(d ≥ D) = ⌊2^53/(D-1)⌋ / 2^53`, which is `1/(D-1)` up to `2^-53`.
//!
//! Samples are split into fixed chunks; chunk `i` draws from ChaCha8
//! seeded with the run seed on stream `i`, so results do not depend on
//! thread count or scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::psi::{PsiSpec, PsiTarget};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::tailsums::tail_sum_target;
use crate::threshold::{decide_ge, exact_product_ge, least_digit, ln_digit, Target};
use crate::weights::WeightVector;

const CHUNK: u64 = 4096;
const TWO_53: u64 = 1 << 53;

pub fn sample_digit<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    let k = rng.gen_range(1..=TWO_53);
    TWO_53 / k + 1
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `f(rng, count)` over chunks and returns the per-chunk results in
/// chunk order.
fn chunked<T: Send>(samples: u64, seed: u64, f: impl Fn(&mut ChaCha8Rng, u64) -> T + Sync) -> Vec<T> {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(samples - c * CHUNK);
            let mut rng = chunk_rng(seed, c);
            f(&mut rng, count)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub sigma: f64,
    pub hits: u64,
    pub samples: u64,
}

fn bernoulli(hits: u64, samples: u64) -> McEstimate {
    let p = hits as f64 / samples as f64;
    McEstimate { estimate: p, sigma: (p * (1.0 - p) / samples as f64).sqrt(), hits, samples }
}

/// Empirical frequency of `d_1 ≥ threshold`.
pub fn digit_tail_frequency(threshold: u64, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::validation("samples must be at least 1"));
    }
    let hits: u64 =
        chunked(samples, seed, |rng, count| (0..count).filter(|_| sample_digit(rng) >= threshold).count() as u64)
            .into_iter()
            .sum();
    Ok(bernoulli(hits, samples))
}

/// Hit test for one window.
struct WindowTest<'a> {
    target: PsiTarget<'a>,
    ln_target: Interval,
    /// least last digit for `m = 1`
    threshold: (u128, u128),
}

impl<'a> WindowTest<'a> {
    fn new(psi: &'a PsiSpec, t: &WeightVector, n: u64) -> Result<Self> {
        let target = psi.target(n)?;
        let ln_target = target.ln();
        let threshold = if t.m() == 1 {
            let w = [t.exact(0).clone()];
            let exact = |d: u128| exact_product_ge(&[d], &w, &target);
            least_digit(Interval::ZERO, t.get(0), ln_target, Some(&exact))
        } else {
            (0, 0)
        };
        Ok(WindowTest { target, ln_target, threshold })
    }

    /// Ties and undecidable comparisons count as hits.
    fn hit(&self, t: &WeightVector, ds: &[u64]) -> bool {
        if ds.len() == 1 {
            let d = ds[0] as u128;
            if d >= self.threshold.1 {
                return true;
            }
            if d < self.threshold.0 {
                return false;
            }
        }
        let mut ln = Interval::ZERO;
        for (i, &d) in ds.iter().enumerate() {
            ln = ln + ln_digit(d as u128) * t.get(i);
        }
        decide_ge(ln, self.ln_target, || {
            let wide: Vec<u128> = ds.iter().map(|&d| d as u128).collect();
            exact_product_ge(&wide, t.exact_all(), &self.target)
        })
        .unwrap_or(true)
    }
}

/// Fraction of digit streams hitting at least one window in `[n1, n2]`.
pub fn window_event_mc(
    psi: &PsiSpec,
    t: &WeightVector,
    (n1, n2): (u64, u64),
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n1 < 1 || n2 < n1 {
        return Err(Error::validation(format!("need 1 ≤ N1 ≤ N2, got [{n1}, {n2}]")));
    }
    if samples == 0 {
        return Err(Error::validation("samples must be at least 1"));
    }
    let m = t.m();
    let tests = (n1..=n2).map(|n| WindowTest::new(psi, t, n)).collect::<Result<Vec<_>>>()?;
    let len = tests.len() + m - 1;
    let hits: u64 = chunked(samples, seed, |rng, count| {
        let mut ds = vec![0u64; len];
        let mut hits = 0u64;
        for _ in 0..count {
            ds.iter_mut().for_each(|d| *d = sample_digit(rng));
            if tests.iter().enumerate().any(|(i, w)| w.hit(t, &ds[i..i + m])) {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum();
    Ok(bernoulli(hits, samples))
}

/// Statistics of `A(N, x) = #{n ≤ N : window n fires}` at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BcRow {
    pub n: u64,
    pub mean_hits: f64,
    pub var_hits: f64,
    /// enclosure of `φ(N) = Σ_{n ≤ N} λ(E_n)`
    pub phi_lower: f64,
    pub phi_upper: f64,
    /// sample mean of `A - φ`, taking `φ` at the centre of its enclosure
    pub mean_excess: f64,
    /// standard error of the sample mean
    pub sigma_mean: f64,
}

fn checkpoints(n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut scale = 1u64;
    'outer: loop {
        for k in [1, 2, 5] {
            let v = k * scale;
            if v >= n_max {
                break 'outer;
            }
            out.push(v);
        }
        scale *= 10;
    }
    out.push(n_max);
    out
}

/// Exact measure of a single window event, as an enclosure.
pub fn window_measure(psi: &PsiSpec, t: &WeightVector, n: u64) -> Result<Interval> {
    let target = psi.target(n)?;
    let r = tail_sum_target(t, &target, 1e-12, crate::tailsums::DEFAULT_TERM_BUDGET)?;
    Ok(r.enclosure())
}

pub fn borel_cantelli_counter(
    t: &WeightVector,
    psi: &PsiSpec,
    n_max: u64,
    samples: u64,
    seed: u64,
) -> Result<Vec<BcRow>> {
    if n_max == 0 {
        return Err(Error::validation("N must be at least 1"));
    }
    if samples == 0 {
        return Err(Error::validation("samples must be at least 1"));
    }
    let m = t.m();
    let marks = checkpoints(n_max);
    let tests = (1..=n_max).map(|n| WindowTest::new(psi, t, n)).collect::<Result<Vec<_>>>()?;

    let mut phi = Vec::with_capacity(marks.len());
    let mut acc = Interval::ZERO;
    let mut next_mark = 0;
    for n in 1..=n_max {
        acc = acc + window_measure(psi, t, n)?;
        if n == marks[next_mark] {
            phi.push(acc);
            next_mark += 1;
        }
    }

    let per_chunk = chunked(samples, seed, |rng, count| {
        let mut sums = vec![(0u64, 0u128); marks.len()];
        let mut ds = vec![0u64; m];
        for _ in 0..count {
            // sliding window over the stream
            for d in ds.iter_mut().take(m - 1) {
                *d = sample_digit(rng);
            }
            let mut a = 0u64;
            let mut j = 0;
            for (i, test) in tests.iter().enumerate() {
                ds[m - 1] = sample_digit(rng);
                if test.hit(t, &ds) {
                    a += 1;
                }
                if i as u64 + 1 == marks[j] {
                    sums[j].0 += a;
                    sums[j].1 += (a as u128) * (a as u128);
                    j += 1;
                }
                ds.rotate_left(1);
            }
            debug_assert_eq!(j, marks.len());
        }
        sums
    });
    let mut totals = vec![(0u64, 0u128); marks.len()];
    for chunk in per_chunk {
        for (tot, c) in totals.iter_mut().zip(chunk) {
            tot.0 += c.0;
            tot.1 += c.1;
        }
    }
    let ns = samples as f64;
    Ok(marks
        .iter()
        .zip(totals)
        .zip(phi)
        .map(|((&n, (s1, s2)), phi)| {
            let mean = s1 as f64 / ns;
            let var = if samples > 1 { ((s2 as f64) - ns * mean * mean).max(0.0) / (ns - 1.0) } else { 0.0 };
            BcRow {
                n,
                mean_hits: mean,
                var_hits: var,
                phi_lower: phi.lo,
                phi_upper: phi.hi,
                mean_excess: mean - phi.mid(),
                sigma_mean: (var / ns).sqrt(),
            }
        })
        .collect())
}
