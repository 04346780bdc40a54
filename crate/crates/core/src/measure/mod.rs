//! Growth functions `Ψ`, the zero-one series and its verdict, and exact and
//! simulated measures of finite unions of window events.

pub mod dp;
pub mod montecarlo;
pub mod psi;
pub mod series;

pub use dp::{window_event_measure_dp, window_event_measure_dp_with, DpOptions, DpResult};
pub use montecarlo::{
    borel_cantelli_counter, digit_tail_frequency, sample_digit, window_event_mc, window_measure, BcRow, McEstimate,
};
pub use psi::{PsiSpec, PsiTarget};
pub use series::{
    classify, digit_tail_probability, exponents, series_term, zero_one_series_terms, GrowthExponents, MeasureVerdict,
    Provenance, SeriesBehavior, SeriesTerm, ZeroOneVerdict,
};
