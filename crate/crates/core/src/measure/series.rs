use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::psi::PsiSpec;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::ln2;
use crate::weights::WeightVector;

const HYPOTHESIS: &str = "liminf Ψ(n) > 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Estimated,
}

/// `log B = liminf log Ψ(n)/n` and `log b = liminf log log Ψ(n)/n`, both
/// clamped to `[1, ∞]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthExponents {
    pub big_b: f64,
    pub small_b: f64,
    pub provenance: Provenance,
    /// Table horizon the estimate was taken over.
    pub horizon: Option<u64>,
    /// For estimates, the spread of `exp(log Ψ(n)/n)` over the window.
    pub big_b_range: Option<(f64, f64)>,
}

pub const MIN_TABLE_LEN: usize = 10;

fn analytic(big_b: f64, small_b: f64) -> GrowthExponents {
    GrowthExponents { big_b, small_b, provenance: Provenance::Analytic, horizon: None, big_b_range: None }
}

pub fn exponents(psi: &PsiSpec) -> Result<GrowthExponents> {
    Ok(match psi {
        PsiSpec::Geometric { base } => analytic(base.value, 1.0),
        PsiSpec::DoublyExponential { a, c } => {
            if a.value > 1.0 && c.value > 1.0 {
                analytic(f64::INFINITY, c.value)
            } else {
                analytic(1.0, 1.0)
            }
        }
        PsiSpec::Polynomial { .. } => analytic(1.0, 1.0),
        PsiSpec::Counterexample { .. } => analytic(1.0, 1.0),
        PsiSpec::Table { values } => {
            let len = values.len();
            if len < MIN_TABLE_LEN {
                return Err(Error::validation(format!(
                    "table needs at least {MIN_TABLE_LEN} entries to estimate exponents, got {len}"
                )));
            }
            let start = len.div_ceil(2).max(1);
            let mut rates = Vec::new();
            let mut double_rates = Vec::new();
            for n in start..=len {
                let l = psi.ln_value(n as u64)?.mid();
                rates.push(l / n as f64);
                if l > 0.0 {
                    double_rates.push(l.ln() / n as f64);
                }
            }
            let lo = rates.iter().copied().fold(f64::INFINITY, f64::min).exp().max(1.0);
            let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp().max(1.0);
            let small_b = double_rates.iter().copied().fold(f64::INFINITY, f64::min).exp().max(1.0);
            let small_b = if small_b.is_finite() { small_b } else { 1.0 };
            GrowthExponents {
                big_b: lo,
                small_b,
                provenance: Provenance::Estimated,
                horizon: Some(len as u64),
                big_b_range: Some((lo, hi)),
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub n: u64,
    pub term: f64,
    pub partial_sum: f64,
}

/// Enclosure of `(log Ψ(n))^{ℓ-1} / Ψ(n)^{1/T}`. For `ℓ ≥ 2` a term with
/// `Ψ(n) ≤ 1` has no meaningful logarithm power and is set to 1.
pub fn series_term(psi: &PsiSpec, t: &WeightVector, n: u64) -> Result<Interval> {
    let l = psi.ln_value(n)?;
    let ell = t.ell() as u32;
    if ell >= 2 && l.hi <= 0.0 {
        return Ok(Interval::ONE);
    }
    let decay = (-(l / Interval::point(t.t_max()))).exp();
    if ell == 1 {
        return Ok(decay);
    }
    let base = l.max(Interval::ZERO);
    Ok(base.powi(ell - 1) * decay)
}

pub fn zero_one_series_terms(psi: &PsiSpec, t: &WeightVector, n_max: u64) -> Result<Vec<SeriesTerm>> {
    if n_max == 0 {
        return Err(Error::validation("N must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_max as usize);
    let mut sum = 0.0;
    for n in 1..=n_max {
        let a = series_term(psi, t, n)?.mid();
        if !(a >= 0.0) {
            return Err(Error::domain(format!("series term at n = {n} is not a non-negative number")));
        }
        sum += a;
        out.push(SeriesTerm { n, term: a, partial_sum: sum });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesBehavior {
    Converges,
    Diverges,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasureVerdict {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "undetermined")]
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroOneVerdict {
    pub series_behavior: SeriesBehavior,
    pub measure: MeasureVerdict,
    pub warning: Option<String>,
    pub exponents: GrowthExponents,
    /// Partial sum over the table, for table inputs.
    pub partial_sum: Option<f64>,
}

fn by_series(b: SeriesBehavior) -> MeasureVerdict {
    match b {
        SeriesBehavior::Converges => MeasureVerdict::Zero,
        SeriesBehavior::Diverges => MeasureVerdict::One,
        SeriesBehavior::Undetermined => MeasureVerdict::Undetermined,
    }
}

fn hypothesis_fails(detail: &str) -> String {
    format!("hypothesis {HYPOTHESIS} fails ({detail}); the zero-one dichotomy does not apply")
}

pub fn classify(psi: &PsiSpec, t: &WeightVector) -> Result<ZeroOneVerdict> {
    psi.validate()?;
    let ell = t.ell();
    let t_max = t.t_max();
    let mut partial_sum = None;
    let exps;
    // (series behaviour, hypothesis holds, warning detail)
    let (series, holds, detail): (SeriesBehavior, bool, Option<String>) = match psi {
        PsiSpec::Geometric { base } => {
            exps = exponents(psi)?;
            if base.value > 1.0 {
                (SeriesBehavior::Converges, true, None)
            } else {
                (SeriesBehavior::Diverges, false, Some("Ψ ≡ 1".into()))
            }
        }
        PsiSpec::DoublyExponential { a, c } => {
            exps = exponents(psi)?;
            if a.is_one() {
                (SeriesBehavior::Diverges, false, Some("Ψ ≡ 1".into()))
            } else if c.is_one() {
                (SeriesBehavior::Diverges, true, None)
            } else if c.value > 1.0 {
                (SeriesBehavior::Converges, true, None)
            } else {
                let s = if ell == 1 { SeriesBehavior::Diverges } else { SeriesBehavior::Converges };
                (s, false, Some("Ψ(n) → 1".into()))
            }
        }
        PsiSpec::Polynomial { p } => {
            exps = exponents(psi)?;
            // (p log n)^{ℓ-1} n^{-p/T}: a log-weighted p-series
            let s = if p.value > t_max { SeriesBehavior::Converges } else { SeriesBehavior::Diverges };
            (s, true, None)
        }
        PsiSpec::Counterexample { r, .. } => {
            exps = exponents(psi)?;
            let s = if ell == 1 { SeriesBehavior::Diverges } else { SeriesBehavior::Converges };
            let full = (r.interval()).hi < (ln2() * t.sum()).lo;
            let detail = if full {
                "Ψ(n) → 1, and Ψ(n) < 2^(t_0+…+t_{m-1}) for every n, so every digit tuple clears the threshold and the set is all of (0,1] (Lebesgue measure 1)".to_string()
            } else {
                "Ψ(n) → 1".to_string()
            };
            (s, false, Some(detail))
        }
        PsiSpec::Table { values } => {
            exps = exponents(psi)?;
            let terms = zero_one_series_terms(psi, t, values.len() as u64)?;
            partial_sum = terms.last().map(|x| x.partial_sum);
            return Ok(ZeroOneVerdict {
                series_behavior: SeriesBehavior::Undetermined,
                measure: MeasureVerdict::Undetermined,
                warning: Some(format!(
                    "finite table: convergence and {HYPOTHESIS} cannot be decided from {} values",
                    values.len()
                )),
                exponents: exps,
                partial_sum,
            });
        }
    };
    let (measure, warning) = if holds {
        (by_series(series), None)
    } else {
        (MeasureVerdict::Undetermined, detail.map(|d| hypothesis_fails(&d)))
    };
    Ok(ZeroOneVerdict { series_behavior: series, measure, warning, exponents: exps, partial_sum })
}

/// `λ(d_n ≥ m) = Σ_{d ≥ m} 1/(d(d-1)) = 1/(m-1)`.
pub fn digit_tail_probability(m_threshold: u64) -> Result<BigRational> {
    if m_threshold < 2 {
        return Err(Error::domain(format!("threshold {m_threshold} is below 2")));
    }
    Ok(BigRational::new(BigInt::from(1), BigInt::from(m_threshold - 1)))
}
