use luroth_core::measure::{
    borel_cantelli_counter, classify, digit_tail_frequency, digit_tail_probability, sample_digit, window_event_mc,
    window_event_measure_dp, window_measure, MeasureVerdict, PsiSpec, SeriesBehavior,
};
use luroth_core::WeightVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn psi(s: &str) -> PsiSpec {
    PsiSpec::parse(s).unwrap()
}

fn w(s: &str) -> WeightVector {
    WeightVector::parse(s).unwrap()
}

#[test]
fn digit_law_exact_and_sampled() {
    for m in 2..40u64 {
        assert_eq!(digit_tail_probability(m).unwrap(), BigRational::new(BigInt::from(1), BigInt::from(m - 1)));
    }
    assert!(digit_tail_probability(1).is_err());
    for m in [2u64, 3, 5, 11, 101] {
        let est = digit_tail_frequency(m, 200_000, 7).unwrap();
        let p = 1.0 / (m - 1) as f64;
        assert!((est.estimate - p).abs() <= 5.0 * est.sigma.max(1e-6), "m={m}: {est:?}");
    }
}

#[test]
fn sampled_digits_have_first_digit_law() {
    // P(d = k) = 1/(k(k-1))
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 300_000;
    let mut counts = [0u64; 6];
    for _ in 0..n {
        let d = sample_digit(&mut rng);
        assert!(d >= 2);
        if d < 8 {
            counts[(d - 2) as usize] += 1;
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        let k = (i + 2) as f64;
        let p = 1.0 / (k * (k - 1.0));
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((c as f64 / n as f64 - p).abs() <= 5.0 * sigma, "digit {k}");
    }
}

/// Least `d ≥ 2` with `d² ≥ n^p`, i.e. `d ≥ n^{p/2}`.
fn least_root(n: u64, p: u32) -> u64 {
    let target = (n as u128).pow(p);
    let mut d = 2u64;
    while (d as u128) * (d as u128) < target {
        d += 1;
    }
    d
}

/// For `m = 1` the windows are independent: `1 - ∏ (1 - 1/(d*(n) - 1))`
/// with `d*(n)` the least qualifying digit.
fn independent_union(n1: u64, n2: u64, least: impl Fn(u64) -> u64) -> f64 {
    let mut ln_avoid = 0.0f64;
    for n in n1..=n2 {
        let p = 1.0 / (least(n) - 1) as f64;
        if p >= 1.0 {
            return 1.0;
        }
        ln_avoid += (1.0 - p).ln();
    }
    1.0 - ln_avoid.exp()
}

#[test]
fn polynomial_half_single_digit_matches_product() {
    let p = psi("polynomial:1/2");
    for (n1, n2) in [(5, 50), (5, 1000), (17, 400)] {
        let dp = window_event_measure_dp(&p, &w("1"), (n1, n2), 4096).unwrap();
        let exact = independent_union(n1, n2, |n| least_root(n, 1));
        assert!(dp.lower - 1e-12 <= exact && exact <= dp.upper + 1e-12, "[{n1},{n2}] {dp:?} vs {exact}");
    }
    let dp = window_event_measure_dp(&p, &w("1"), (5, 10_000), 4096).unwrap();
    assert!(dp.lower > 0.99, "{dp:?}");
}

/// `λ(d_0 d_1 ≥ g) ≤ (2/g)(1 + log(g/2)) + 2/(g-2)`: split at `d_0 = g/2`
/// and use `1/(g/d_0 - 1) ≤ 2 d_0 / g` below it.
fn pair_union_bound(g: f64) -> f64 {
    2.0 / g * (1.0 + (g / 2.0).ln()) + 2.0 / (g - 2.0)
}

#[test]
fn geometric_pair_far_window_is_small() {
    let p = psi("geometric:2");
    let t = w("1,1");
    let dp = window_event_measure_dp(&p, &t, (30, 60), 4096).unwrap();
    let bound: f64 = (30..=60).map(|n| pair_union_bound(2f64.powi(n))).sum();
    assert!(dp.upper < 1e-6, "{dp:?}");
    assert!(dp.lower <= bound, "{dp:?} vs {bound}");
    assert!(dp.upper >= 2f64.powi(-30), "{dp:?}");
}

#[test]
fn window_union_between_max_and_sum() {
    let p = psi("geometric:2");
    let t = w("1,1");
    let dp = window_event_measure_dp(&p, &t, (8, 16), 4096).unwrap();
    let singles: Vec<_> = (8..=16).map(|n| window_measure(&p, &t, n).unwrap()).collect();
    let sum: f64 = singles.iter().map(|x| x.hi).sum();
    let max = singles.iter().map(|x| x.lo).fold(0.0, f64::max);
    assert!(max <= dp.upper && dp.lower <= sum, "{dp:?} in [{max}, {sum}]");
}

#[test]
fn counterexample_is_full_measure() {
    let p = psi("counterexample:0.3,1");
    for n2 in [1u64, 5, 40] {
        let dp = window_event_measure_dp(&p, &w("1,1"), (1, n2), 4096).unwrap();
        assert_eq!((dp.lower, dp.upper), (1.0, 1.0), "N={n2}");
    }
}

#[test]
fn dp_and_mc_agree_for_pairs() {
    let cases =
        [("geometric:2", "1,1", (3u64, 10u64)), ("polynomial:2", "1,1", (5, 12)), ("geometric:3/2", "2,1", (6, 14))];
    for (ps, ts, range) in cases {
        let (p, t) = (psi(ps), w(ts));
        let dp = window_event_measure_dp(&p, &t, range, 4096).unwrap();
        let mid = 0.5 * (dp.lower + dp.upper);
        let mc = window_event_mc(&p, &t, range, 400_000, 11).unwrap();
        let sigma = (mid * (1.0 - mid) / mc.samples as f64).sqrt();
        assert!(mid > 0.01 && mid < 0.99, "{ps} trivial: {mid}");
        assert!((mc.estimate - mid).abs() <= 4.0 * sigma + dp.width(), "{ps}: dp {dp:?} mc {mc:?}");
    }
}

#[test]
fn verdicts() {
    let v = classify(&psi("geometric:2"), &w("1,1")).unwrap();
    assert_eq!((v.series_behavior, v.measure), (SeriesBehavior::Converges, MeasureVerdict::Zero));
    let v = classify(&psi("polynomial:1/2"), &w("1")).unwrap();
    assert_eq!((v.series_behavior, v.measure), (SeriesBehavior::Diverges, MeasureVerdict::One));
    // p compared with the largest weight
    let v = classify(&psi("polynomial:3/2"), &w("1,2")).unwrap();
    assert_eq!(v.measure, MeasureVerdict::One);
    let v = classify(&psi("polynomial:5/2"), &w("1,2")).unwrap();
    assert_eq!(v.measure, MeasureVerdict::Zero);
    let v = classify(&psi("doubly_exponential:e,3"), &w("1,1")).unwrap();
    assert_eq!(v.measure, MeasureVerdict::Zero);
    let v = classify(&psi("counterexample:0.3,1"), &w("1,1")).unwrap();
    assert_eq!(v.measure, MeasureVerdict::Undetermined);
    assert!(v.warning.is_some());
    let v = classify(&psi("table:2,4,8,16,32,64,128,256,512,1024"), &w("1")).unwrap();
    assert_eq!(v.measure, MeasureVerdict::Undetermined);
    assert!(v.partial_sum.unwrap() > 0.0);
}

#[test]
fn counter_tracks_phi() {
    let rows = borel_cantelli_counter(&w("1"), &psi("polynomial:1"), 200, 20_000, 5).unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last.n, 200);
    // expected hits equal Φ(N) = Σ 1/(n-1) style sums
    let phi = 0.5 * (last.phi_lower + last.phi_upper);
    assert!((last.mean_hits - phi).abs() <= 5.0 * last.sigma_mean + 1e-9, "{last:?}");
    let again = borel_cantelli_counter(&w("1"), &psi("polynomial:1"), 200, 20_000, 5).unwrap();
    assert_eq!(rows, again);
}

#[test]
fn mc_is_seeded() {
    let (p, t) = (psi("geometric:2"), w("1,1"));
    let a = window_event_mc(&p, &t, (1, 6), 50_000, 42).unwrap();
    let b = window_event_mc(&p, &t, (1, 6), 50_000, 42).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn dp_monotone_in_window(n1 in 2u64..10, len in 0u64..10, extra in 1u64..5) {
        let (p, t) = (psi("geometric:2"), w("1,1"));
        let a = window_event_measure_dp(&p, &t, (n1, n1 + len), 1024).unwrap();
        let b = window_event_measure_dp(&p, &t, (n1, n1 + len + extra), 1024).unwrap();
        prop_assert!(a.lower <= b.upper);
        prop_assert!(0.0 <= a.lower && a.upper <= 1.0);
    }

    #[test]
    fn single_digit_dp_oracle(n1 in 1u64..30, len in 0u64..40, p in 1u32..4) {
        let spec = psi(&format!("polynomial:{p}/2"));
        let dp = window_event_measure_dp(&spec, &w("1"), (n1, n1 + len), 4096).unwrap();
        let exact = independent_union(n1, n1 + len, |n| least_root(n, p));
        prop_assert!(dp.lower - 1e-12 <= exact && exact <= dp.upper + 1e-12);
    }
}
