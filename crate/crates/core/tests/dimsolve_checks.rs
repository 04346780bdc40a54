use luroth_core::dimsolve::{
    continuity_scan, dimension, dimension_from_exponents, f_recursive, f_weighted, g_sum, solve,
    solve_truncated_sequence, DimKind, DimProblem, DimStatus, Truncation,
};
use luroth_core::measure::{GrowthExponents, Provenance, PsiSpec};
use luroth_core::WeightVector;
use proptest::prelude::*;

fn w(s: &str) -> WeightVector {
    WeightVector::parse(s).unwrap()
}

fn pair(t0: f64, t1: f64) -> DimKind {
    DimKind::PairWeighted { t0, t1 }
}

/// `Σ_{d≥2} (d(d-1))^{-s}` by direct summation to `D` plus an
/// Euler–Maclaurin tail, for `1/2 < s ≤ 1`.
struct Zeta {
    ln_terms: Vec<f64>,
}

impl Zeta {
    const D: u64 = 1_000_000;

    fn new() -> Self {
        Zeta { ln_terms: (2..=Self::D).map(|d| ((d * (d - 1)) as f64).ln()).collect() }
    }

    fn eval(&self, s: f64) -> f64 {
        let head: f64 = self.ln_terms.iter().rev().map(|l| (-s * l).exp()).sum();
        let d = Self::D as f64;
        // ∫_D^∞ x^{-2s}(1 + s/x + s(s+1)/(2x²)) dx - f(D)/2 - f'(D)/12
        let integral = d.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0)
            + s * d.powf(-2.0 * s) / (2.0 * s)
            + s * (s + 1.0) / 2.0 * d.powf(-2.0 * s - 1.0) / (2.0 * s + 1.0);
        let f = (d * (d - 1.0)).powf(-s);
        let df = -s * (2.0 * d - 1.0) * (d * (d - 1.0)).powf(-s - 1.0);
        head + integral - f / 2.0 - df / 12.0
    }

    /// Root of `log Z(s) = e(s) log B` by plain bisection.
    fn root(&self, b: f64, e: impl Fn(f64) -> f64) -> f64 {
        let (mut lo, mut hi) = (0.5 + 1e-6, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid).ln() > e(mid) * b.ln() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[test]
fn brute_force_roots() {
    let z = Zeta::new();
    // the tail expansion itself, checked against a longer head at one s
    let s = 0.7;
    let longer: f64 = (2..=4_000_000u64).map(|d| ((d * (d - 1)) as f64).powf(-s)).sum::<f64>()
        + 4e6f64.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0);
    assert!((z.eval(s) - longer).abs() < 1e-6, "{} vs {longer}", z.eval(s));

    type Exponent = Box<dyn Fn(f64) -> f64>;
    let cases: [(DimKind, f64, Exponent); 4] = [
        (pair(1.0, 1.0), 4.0, Box::new(|s| s * s)),
        (DimKind::Single, 2.0, Box::new(|s| s)),
        (DimKind::PairUnit, 3.0, Box::new(|s| 2.0 * s)),
        (pair(1.0, 2.0), 5.0, Box::new(|s| f_weighted(1.0, 2.0, s).unwrap())),
    ];
    for (kind, b, e) in cases {
        let oracle = z.root(b, e);
        let sol = solve(&DimProblem::new(kind.clone(), b, 1e-11)).unwrap();
        assert!(sol.s_lower - 1e-9 <= oracle && oracle <= sol.s_upper + 1e-9, "{kind} B={b}: {sol:?} vs {oracle}");
        if kind == pair(1.0, 1.0) {
            assert!((oracle - 0.73683548927).abs() < 1e-9, "{oracle}");
        }
    }
}

#[test]
fn telescoping_pins() {
    for b in [1.5, 2.0, 4.0, 10.0, 1e3] {
        let g = g_sum(&DimKind::Single, b, 1.0, Truncation::CertifiedTail).unwrap();
        assert!(g.lo - 1e-12 <= 1.0 / b && 1.0 / b <= g.hi + 1e-12 && g.hi - g.lo < 1e-12, "B={b}: {g:?}");
        for (t0, t1) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (0.5, 3.0)] {
            let g = g_sum(&pair(t0, t1), b, 1.0, Truncation::CertifiedTail).unwrap();
            // the sum telescopes to 1, the factor is B^{-f(1)}
            let exact = b.powf(-f_weighted(t0, t1, 1.0).unwrap());
            assert!((g.mid() - exact).abs() < 1e-12, "({t0},{t1}) B={b}: {g:?} vs {exact}");
            if t1 >= t0 {
                assert!((exact - b.powf(-1.0 / t1)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn single_digit_limits() {
    let far = solve(&DimProblem::new(DimKind::Single, 1e8, 1e-10)).unwrap();
    assert!(far.s_lower > 0.5 && far.s_upper < 0.52, "{far:?}");
    let near = solve(&DimProblem::new(DimKind::Single, 1.0 + 1e-6, 1e-10)).unwrap();
    assert!(near.s_lower > 0.997, "{near:?}");
}

#[test]
fn truncated_roots_increase_towards_full_root() {
    let kind = pair(1.0, 1.0);
    let ns: Vec<u64> = (1..=12).map(|k| 1u64 << k).collect();
    let rows = solve_truncated_sequence(&kind, 2.0, &ns, 1e-12).unwrap();
    let full = solve(&DimProblem::new(kind, 2.0, 1e-12)).unwrap();
    for pair in rows.windows(2) {
        assert!(pair[0].s_upper < pair[1].s_lower, "{pair:?}");
    }
    let gaps: Vec<f64> = rows.iter().map(|r| full.s_lower - r.s_upper).collect();
    assert!(gaps.iter().all(|g| *g > 0.0));
    // the gap decays like n^{1-2s}: each doubling of n shrinks it by about 2^{1-2s}
    let s = full.mid();
    for k in 6..gaps.len() {
        let ratio = gaps[k] / gaps[k - 1];
        assert!((ratio - 2f64.powf(1.0 - 2.0 * s)).abs() < 0.05, "n=2^{}: {ratio}", k + 1);
    }
    assert!(gaps[11] < 2e-3, "{}", gaps[11]);
}

#[test]
fn two_digit_equation_by_hand() {
    // Σ over d = 2 only: 2^{-s} 2^{-s²} = 1 has the root s = 0
    let rows = solve_truncated_sequence(&pair(1.0, 1.0), 2.0, &[2], 1e-12).unwrap();
    assert!(rows[0].s_lower <= 0.0 + 1e-12 && rows[0].s_upper < 1e-11, "{rows:?}");
    // with d ≤ 3 and B = 2: 2^{-s} + 6^{-s} = 2^{s²}
    let rows = solve_truncated_sequence(&pair(1.0, 1.0), 2.0, &[3], 1e-13).unwrap();
    let h = |s: f64| 2f64.powf(-s) + 6f64.powf(-s) - 2f64.powf(s * s);
    assert!(h(rows[0].s_lower) >= -1e-12 && h(rows[0].s_upper) <= 1e-12);
}

#[test]
fn continuity_refinement() {
    let grid: Vec<f64> = (0..9).map(|i| 1.5 + 0.5 * i as f64).collect();
    for kind in [pair(1.0, 1.0), DimKind::Single] {
        let rep = continuity_scan(&kind, &grid, 1e-11).unwrap();
        assert!(rep.monotone);
        assert!(rep.jump_ratio() <= 0.6, "{kind}: {}", rep.jump_ratio());
    }
}

#[test]
fn weighted_f_identities() {
    for i in 1..=1000 {
        let s = i as f64 / 1000.0;
        assert!((f_weighted(1.0, 1.0, s).unwrap() - s * s).abs() < 1e-14);
        for (t0, t1) in [(1.0, 2.0), (2.0, 1.0), (0.5, 0.5), (3.0, 0.25)] {
            let direct = f_weighted(t0, t1, s).unwrap();
            let rec = f_recursive(&[t0, t1], s).unwrap();
            assert!((direct - rec).abs() < 1e-12, "({t0},{t1}) s={s}");
        }
    }
}

#[test]
fn weighted_f_strictly_increasing() {
    for (t0, t1) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (0.5, 3.0), (1.5, 1.5)] {
        let mut prev = 0.0;
        for i in 1..=2000 {
            let f = f_weighted(t0, t1, i as f64 / 2000.0).unwrap();
            assert!(f > prev, "({t0},{t1}) at {i}");
            prev = f;
        }
    }
}

#[test]
fn closed_form_dimensions() {
    for t in ["1", "1,1", "2,1", "1,1,1"] {
        let d = dimension(&PsiSpec::parse("polynomial:5").unwrap(), &w(t)).unwrap();
        assert_eq!((d.value(), d.status), (1.0, DimStatus::ClosedForm));
        let d = dimension(&PsiSpec::parse("doubly_exponential:e,3").unwrap(), &w(t)).unwrap();
        assert_eq!(d.value(), 0.25);
        let inf = GrowthExponents {
            big_b: f64::INFINITY,
            small_b: f64::INFINITY,
            provenance: Provenance::Analytic,
            horizon: None,
            big_b_range: None,
        };
        assert_eq!(dimension_from_exponents(&inf, &w(t)).unwrap().value(), 0.0);
    }
    // finite B: a single weight rescales the base
    let d = dimension(&PsiSpec::parse("geometric:4").unwrap(), &w("2")).unwrap();
    let direct = solve(&DimProblem::new(DimKind::Single, 2.0, 1e-10)).unwrap();
    assert!((d.value() - direct.mid()).abs() < 1e-9);
    let d = dimension(&PsiSpec::parse("geometric:4").unwrap(), &w("1,1,1")).unwrap();
    assert_eq!(d.status, DimStatus::Conjecture);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn g_decreases_in_s(b in 1.1f64..50.0, s in 0.55f64..0.95, ds in 0.01f64..0.05) {
        let kind = pair(1.0, 1.0);
        let a = g_sum(&kind, b, s, Truncation::CertifiedTail).unwrap();
        let c = g_sum(&kind, b, s + ds, Truncation::CertifiedTail).unwrap();
        prop_assert!(c.hi < a.lo);
    }

    #[test]
    fn root_is_non_increasing_in_b(b in 1.1f64..20.0, db in 0.1f64..5.0, t1 in 0.5f64..2.0) {
        let kind = pair(1.0, t1);
        let a = solve(&DimProblem::new(kind.clone(), b, 1e-9)).unwrap();
        let c = solve(&DimProblem::new(kind, b + db, 1e-9)).unwrap();
        prop_assert!(c.s_lower <= a.s_upper);
    }

    #[test]
    fn recursion_is_bounded(s in 0.5f64..1.0, w0 in 0.5f64..2.0, w1 in 0.5f64..2.0, w2 in 0.5f64..2.0) {
        let f = f_recursive(&[w0, w1, w2], s).unwrap();
        prop_assert!(f > 0.0 && f.is_finite());
    }
}
