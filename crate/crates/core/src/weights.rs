use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{parse_rational, rational_from_f64};

/// Weights `t = (t_0, …, t_{m-1})`, kept as exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    exact: Vec<BigRational>,
    float: Vec<f64>,
}

impl WeightVector {
    pub fn new(exact: Vec<BigRational>) -> Result<Self> {
        if exact.is_empty() {
            return Err(Error::validation("weight vector must be non-empty"));
        }
        if let Some(bad) = exact.iter().find(|t| !t.is_positive()) {
            return Err(Error::validation(format!("weight {bad} is not positive")));
        }
        let float = exact.iter().map(|t| t.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>();
        if float.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::validation("weight out of floating range"));
        }
        Ok(WeightVector { exact, float })
    }

    pub fn from_f64s(ts: &[f64]) -> Result<Self> {
        let exact = ts.iter().map(|&t| rational_from_f64(t)).collect::<Result<Vec<_>>>()?;
        Self::new(exact)
    }

    /// Comma-separated list, each entry a decimal or `p/q`.
    pub fn parse(text: &str) -> Result<Self> {
        let exact = text.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        Self::new(exact)
    }

    pub fn m(&self) -> usize {
        self.exact.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.float[i]
    }

    pub fn exact(&self, i: usize) -> &BigRational {
        &self.exact[i]
    }

    pub fn as_f64(&self) -> &[f64] {
        &self.float
    }

    pub fn exact_all(&self) -> &[BigRational] {
        &self.exact
    }

    /// `t = min t_i`.
    pub fn t_min(&self) -> f64 {
        let i = (0..self.m()).min_by(|&a, &b| self.exact[a].cmp(&self.exact[b])).expect("non-empty");
        self.float[i]
    }

    /// `T = max t_i`.
    pub fn t_max(&self) -> f64 {
        self.float[self.argmax()]
    }

    fn argmax(&self) -> usize {
        (0..self.m()).max_by(|&a, &b| self.exact[a].cmp(&self.exact[b])).expect("non-empty")
    }

    /// `ℓ(t)`: how many weights equal the maximum (compared exactly).
    pub fn ell(&self) -> usize {
        let top = &self.exact[self.argmax()];
        self.exact.iter().filter(|t| *t == top).count()
    }

    pub fn sum(&self) -> f64 {
        self.float.iter().sum()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exact.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}
