use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::{ln2, RealParam};
use crate::threshold::Target;

const MAX_EXACT_BITS: u64 = 1 << 22;

/// A growth function `Ψ: ℕ → (0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PsiSpec {
    /// `Ψ(n) = B^n`.
    Geometric { base: RealParam },
    /// `Ψ(n) = a^{c^n}`.
    DoublyExponential { a: RealParam, c: RealParam },
    /// `Ψ(n) = n^p`.
    Polynomial { p: RealParam },
    /// `Ψ(n) = exp(r^n)`; `t` is the weight level the parameter `r` was
    /// chosen for, with `0 < r < min{1, log 2 / t}`.
    Counterexample { r: RealParam, t: RealParam },
    /// `Ψ(n)` = `values[n-1]` for `n` up to the table length.
    Table { values: Vec<RealParam> },
}

fn params(text: &str) -> Result<Vec<RealParam>> {
    text.split(',').map(RealParam::parse).collect()
}

fn arity(kind: &str, ps: &[RealParam], n: usize) -> Result<()> {
    if ps.len() != n {
        return Err(Error::validation(format!("{kind} takes {n} parameter(s), got {}", ps.len())));
    }
    Ok(())
}

impl PsiSpec {
    /// Parses `kind:params`, e.g. `geometric:2`, `doubly_exponential:e,3`,
    /// `polynomial:1/2`, `counterexample:0.3,1`, `table:2,4,8`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) =
            text.split_once(':').ok_or_else(|| Error::validation(format!("expected kind:params, got '{text}'")))?;
        let ps = params(rest)?;
        let spec = match kind.trim() {
            "geometric" => {
                arity(kind, &ps, 1)?;
                PsiSpec::Geometric { base: ps[0].clone() }
            }
            "doubly_exponential" => {
                arity(kind, &ps, 2)?;
                PsiSpec::DoublyExponential { a: ps[0].clone(), c: ps[1].clone() }
            }
            "polynomial" => {
                arity(kind, &ps, 1)?;
                PsiSpec::Polynomial { p: ps[0].clone() }
            }
            "counterexample" => {
                arity(kind, &ps, 2)?;
                PsiSpec::Counterexample { r: ps[0].clone(), t: ps[1].clone() }
            }
            "table" => PsiSpec::Table { values: ps },
            other => return Err(Error::validation(format!("unknown psi kind '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, p: &RealParam| {
            if p.is_positive() {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} = {p} must be positive")))
            }
        };
        match self {
            PsiSpec::Geometric { base } => {
                positive("B", base)?;
                if base.value < 1.0 {
                    return Err(Error::validation(format!("geometric base {base} must be at least 1")));
                }
            }
            PsiSpec::DoublyExponential { a, c } => {
                positive("a", a)?;
                positive("c", c)?;
                if a.value < 1.0 {
                    return Err(Error::validation(format!("doubly exponential base {a} must be at least 1")));
                }
            }
            PsiSpec::Polynomial { p } => positive("p", p)?,
            PsiSpec::Counterexample { r, t } => {
                positive("r", r)?;
                positive("t", t)?;
                let bound = 1f64.min(std::f64::consts::LN_2 / t.value);
                if !(r.value < bound) {
                    return Err(Error::validation(format!("counterexample needs 0 < r < min(1, log 2 / t) = {bound}")));
                }
            }
            PsiSpec::Table { values } => {
                if values.is_empty() {
                    return Err(Error::validation("table must be non-empty"));
                }
                for v in values {
                    positive("table entry", v)?;
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> Option<u64> {
        match self {
            PsiSpec::Table { values } => Some(values.len() as u64),
            _ => None,
        }
    }

    fn check_n(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::domain("Ψ is indexed from n = 1"));
        }
        if let Some(h) = self.horizon() {
            if n > h {
                return Err(Error::domain(format!("n = {n} is beyond the table horizon {h}")));
            }
        }
        Ok(())
    }

    /// Enclosure of `log Ψ(n)`.
    pub fn ln_value(&self, n: u64) -> Result<Interval> {
        self.check_n(n)?;
        let nn = Interval::point(n as f64);
        Ok(match self {
            PsiSpec::Geometric { base } => base.ln() * nn,
            PsiSpec::DoublyExponential { a, c } => (c.ln() * nn).exp() * a.ln(),
            PsiSpec::Polynomial { p } => p.interval() * nn.ln(),
            PsiSpec::Counterexample { r, .. } => (r.ln() * nn).exp(),
            PsiSpec::Table { values } => values[(n - 1) as usize].ln(),
        })
    }

    pub fn value(&self, n: u64) -> Result<Interval> {
        Ok(self.ln_value(n)?.exp())
    }

    fn exact_pow(&self, n: u64, l: u64) -> Option<BigRational> {
        let small = |base: &BigRational, e: u64| -> Option<BigRational> {
            let bits = base.numer().bits().max(base.denom().bits());
            if bits.saturating_mul(e) > MAX_EXACT_BITS {
                return None;
            }
            Some(num_traits::pow(base.clone(), e.to_usize()?))
        };
        match self {
            PsiSpec::Geometric { base } => small(base.exact.as_ref()?, n.checked_mul(l)?),
            PsiSpec::DoublyExponential { a, c } => {
                let c = c.exact.as_ref()?;
                if !c.is_integer() {
                    return None;
                }
                let cn = c.numer().to_u64()?.checked_pow(n.to_u32()?)?;
                small(a.exact.as_ref()?, cn.checked_mul(l)?)
            }
            PsiSpec::Polynomial { p } => {
                let p = p.exact.as_ref()?;
                let num = p.numer() * BigInt::from(l);
                if (&num % p.denom()) != BigInt::from(0) {
                    return None;
                }
                let e = (num / p.denom()).to_u64()?;
                small(&BigRational::from_integer(n.into()), e)
            }
            PsiSpec::Counterexample { .. } => None,
            PsiSpec::Table { values } => small(values[(n - 1) as usize].exact.as_ref()?, l),
        }
    }

    fn root_hint(&self) -> u64 {
        match self {
            PsiSpec::Polynomial { p } => {
                p.exact.as_ref().and_then(|r| r.denom().to_u64()).filter(|&d| d <= 1 << 16).unwrap_or(1)
            }
            _ => 1,
        }
    }

    /// `Ψ(n)` as a comparison target.
    pub fn target(&self, n: u64) -> Result<PsiTarget<'_>> {
        Ok(PsiTarget { psi: self, n, ln: self.ln_value(n)? })
    }

    /// True when `Ψ(n) ≤ 2^{Σ t_i}`, i.e. every digit tuple clears the
    /// threshold at `n`.
    pub fn below_minimal_product(&self, n: u64, weight_sum: f64) -> Result<bool> {
        Ok(self.ln_value(n)?.hi <= (ln2() * weight_sum).lo)
    }

    /// True when `Ψ(n) = 1` exactly.
    pub fn is_one_at(&self, n: u64) -> bool {
        match self {
            PsiSpec::Geometric { base } => base.is_one(),
            PsiSpec::DoublyExponential { a, .. } => a.is_one(),
            PsiSpec::Polynomial { .. } => n == 1,
            PsiSpec::Counterexample { .. } => false,
            PsiSpec::Table { values } => values.get((n - 1) as usize).is_some_and(|v| v.is_one()),
        }
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiSpec::Geometric { base } => write!(f, "geometric:{base}"),
            PsiSpec::DoublyExponential { a, c } => write!(f, "doubly_exponential:{a},{c}"),
            PsiSpec::Polynomial { p } => write!(f, "polynomial:{p}"),
            PsiSpec::Counterexample { r, t } => write!(f, "counterexample:{r},{t}"),
            PsiSpec::Table { values } => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

pub struct PsiTarget<'a> {
    psi: &'a PsiSpec,
    n: u64,
    ln: Interval,
}

impl Target for PsiTarget<'_> {
    fn ln(&self) -> Interval {
        self.ln
    }

    fn exact_pow(&self, l: u64) -> Option<BigRational> {
        if self.psi.is_one_at(self.n) {
            return Some(BigRational::one());
        }
        self.psi.exact_pow(self.n, l)
    }

    fn root_hint(&self) -> u64 {
        self.psi.root_hint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["geometric:2", "doubly_exponential:e,3", "polynomial:1/2", "counterexample:0.3,1", "table:2,4,8"] {
            let p = PsiSpec::parse(s).unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!(PsiSpec::parse("geometric:0.5").is_err());
        assert!(PsiSpec::parse("counterexample:0.9,1").is_err());
        assert!(PsiSpec::parse("nope:1").is_err());
        assert!(PsiSpec::parse("polynomial:1,2").is_err());
    }

    #[test]
    fn values() {
        let p = PsiSpec::parse("geometric:3").unwrap();
        assert!(p.value(4).unwrap().contains(81.0));
        let d = PsiSpec::parse("doubly_exponential:2,2").unwrap();
        assert!(d.value(3).unwrap().contains(256.0));
        let q = PsiSpec::parse("polynomial:1/2").unwrap();
        assert!(q.value(16).unwrap().contains(4.0));
        let t = PsiSpec::parse("table:5,6").unwrap();
        assert!(t.value(3).is_err());
        assert!(t.value(0).is_err());
    }

    #[test]
    fn exact_powers() {
        let q = PsiSpec::parse("polynomial:1/2").unwrap();
        let target = q.target(16).unwrap();
        assert_eq!(target.root_hint(), 2);
        assert_eq!(target.exact_pow(2), Some(BigRational::from_integer(16.into())));
        let d = PsiSpec::parse("doubly_exponential:2,2").unwrap();
        assert_eq!(d.target(2).unwrap().exact_pow(1), Some(BigRational::from_integer(16.into())));
        let c = PsiSpec::parse("counterexample:0.3,1").unwrap();
        assert_eq!(c.target(2).unwrap().exact_pow(1), None);
    }
}
