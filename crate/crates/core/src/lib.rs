//! Computational tools for Lüroth expansions: exact digit arithmetic,
//! weighted digit tail sums, zero-one laws for weighted digit-product
//! limsup sets, certified solvers for their dimension equations, and a
//! finite-depth Cantor construction with its mass distribution.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cantor;
pub mod dimsolve;
pub mod error;
pub mod expansion;
pub mod interval;
pub mod measure;
pub mod rational;
pub mod tailsums;
pub mod threshold;
pub mod weights;

pub use error::{Error, Result};
pub use expansion::{
    cylinder_length, cylinder_of, evaluate, expand, expand_capped, first_digit, luroth_map, shift, Cylinder, LurothWord,
};
pub use interval::Interval;
pub use rational::{parse_rational, RealParam};
pub use tailsums::{asymptotic_profile, khinchin_integral, tail_sum, tail_sum_f64, ProfileRow, TailSumResult};
pub use weights::WeightVector;
