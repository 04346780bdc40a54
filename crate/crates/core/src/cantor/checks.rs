use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use rand::distributions::{Distribution, WeightedIndex};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{neighbor_words, rational_f64, CantorParams, Node, Position};
use crate::error::{Error, Result};
use crate::expansion::LurothWord;
use crate::interval::Interval;
use crate::measure::PsiSpec;
use crate::rational::{ln_rational, rational_from_f64, rational_interval};
use crate::threshold::{decide_ge, exact_product_ge, ln_digit, Target};

/// Visits the level-`n` words left to right.
pub(crate) fn for_each_word(params: &CantorParams, n: usize, f: &mut dyn FnMut(&Node)) {
    fn rec(params: &CantorParams, node: &Node, n: usize, f: &mut dyn FnMut(&Node)) {
        if node.digits.len() == n {
            f(node);
            return;
        }
        let (lo, hi) = params.range_at(node.digits.len() as u64 + 1);
        for c in (lo..=hi).rev() {
            rec(params, &node.child(c), n, f);
        }
    }
    rec(params, &Node::root(), n, f);
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOptions {
    /// deepest level enumerated in full (default `n_1 + 1`)
    pub exhaustive_depth: Option<usize>,
    /// enumerate every special digit with free digits pinned at 2
    pub skeleton: bool,
    /// random mass-weighted paths through the last level
    pub sample_paths: u64,
    pub seed: u64,
    pub consistency_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { exhaustive_depth: None, skeleton: true, sample_paths: 2000, seed: 0, consistency_tol: 1e-12 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub pairs_checked: u64,
    pub failures: Vec<(u64, u64, u64)>,
    pub undecided: u64,
    /// least `t_0 log d_{n_k} + t_1 log d_{n_k+1} - n_k log B` seen
    pub min_margin: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub nodes_checked: u64,
    pub max_rel_err: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapLevel {
    pub level: usize,
    pub mode: &'static str,
    pub intervals: u64,
    /// least `G_n(d) / |I_n(d)|`
    pub min_ratio: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichLevel {
    pub level: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub nodes: u64,
    pub violations: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderDepth {
    pub depth: usize,
    pub nodes: u64,
    /// largest `μ(J_n) / |J_n|^s`
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CantorReport {
    pub params: CantorParams,
    pub options: CheckOptions,
    pub membership: MembershipReport,
    pub consistency: ConsistencyReport,
    pub gaps: Vec<GapLevel>,
    pub gap_ok: bool,
    pub sampled_gap_ok: bool,
    pub sandwich: Vec<SandwichLevel>,
    pub sandwich_ok: bool,
    pub holder: Vec<HolderDepth>,
    /// `max ratio at n_2 + 1` over `max ratio at n_1 + 1`
    pub holder_growth: Option<f64>,
    pub holder_ok: bool,
    pub all_pass: bool,
}

fn membership(params: &CantorParams) -> Result<MembershipReport> {
    let psi = PsiSpec::Geometric { base: params.b.clone() };
    let (t0, t1) = params.weights;
    let mut rep =
        MembershipReport { pairs_checked: 0, failures: Vec::new(), undecided: 0, min_margin: f64::INFINITY, ok: true };
    for (k, &nk) in params.n_k.iter().enumerate() {
        let target = psi.target(nk)?;
        let ln_t = target.ln();
        let (a0, b0) = params.range0[k];
        let (a1, b1) = params.range1[k];
        for d0 in a0..=b0 {
            let l0 = ln_digit(d0 as u128) * t0;
            for d1 in a1..=b1 {
                let ln = l0 + ln_digit(d1 as u128) * t1;
                rep.pairs_checked += 1;
                rep.min_margin = rep.min_margin.min((ln - ln_t).lo);
                match decide_ge(ln, ln_t, || exact_product_ge(&[d0 as u128, d1 as u128], params.t.exact_all(), &target))
                {
                    Some(true) => {}
                    Some(false) => rep.failures.push((nk, d0, d1)),
                    None => rep.undecided += 1,
                }
            }
        }
    }
    rep.ok = rep.failures.is_empty() && rep.undecided == 0;
    Ok(rep)
}

/// `[1/(2x), 1/x]` for `x = α^{n}`, or the free-position band.
fn sandwich_bounds(params: &CantorParams, level: usize) -> (Interval, Interval) {
    match params.position(level as u64 + 1) {
        Position::Free => (Interval::point(0.5), Interval::ONE - Interval::ONE / Interval::point(params.m as f64)),
        Position::First(k) => {
            let x = (params.ln_alpha0() * params.n_k[k] as f64).exp();
            (Interval::ONE / (x * 2.0), Interval::ONE / x)
        }
        Position::Second(k) => {
            let x = (params.ln_alpha1() * params.n_k[k] as f64).exp();
            (Interval::ONE / (x * 2.0), Interval::ONE / x)
        }
    }
}

/// Per-level accumulator shared by the enumeration passes.
struct LevelStats {
    nodes: u64,
    holder_max: f64,
    sandwich_min: f64,
    sandwich_max: f64,
    sandwich_violations: u64,
    bounds: (Interval, Interval),
}

struct Walker<'a> {
    params: &'a CantorParams,
    s: f64,
    levels: Vec<LevelStats>,
    consistency_nodes: u64,
    max_rel_err: f64,
}

impl<'a> Walker<'a> {
    fn new(params: &'a CantorParams) -> Self {
        let levels = (0..=params.max_level())
            .map(|n| LevelStats {
                nodes: 0,
                holder_max: 0.0,
                sandwich_min: f64::INFINITY,
                sandwich_max: 0.0,
                sandwich_violations: 0,
                bounds: sandwich_bounds(params, n),
            })
            .collect();
        Walker { params, s: params.s, levels, consistency_nodes: 0, max_rel_err: 0.0 }
    }

    /// Sandwich, Hölder ratio and child-mass consistency at one node.
    fn visit(&mut self, node: &Node, ln_mu: Interval) {
        let n = node.digits.len();
        let range = self.params.range_at(n as u64 + 1);
        let (lo, hi) = node.fundamental(range);
        let len_j = &hi - &lo;
        let ratio = &len_j * BigRational::from_integer(BigInt::from(node.q.clone()));
        let r = rational_interval(&ratio);
        let st = &mut self.levels[n];
        st.nodes += 1;
        st.sandwich_min = st.sandwich_min.min(r.lo);
        st.sandwich_max = st.sandwich_max.max(r.hi);
        let holds = match self.params.position(n as u64 + 1) {
            Position::Free => {
                let m = BigRational::from_integer(BigInt::from(self.params.m));
                let one = BigRational::one();
                ratio.clone() * BigRational::from_integer(2.into()) >= one && ratio <= &one - one.clone() / m
            }
            _ => r.lo >= st.bounds.0.hi && r.hi <= st.bounds.1.lo,
        };
        if !holds {
            st.sandwich_violations += 1;
        }
        let holder = ln_mu.hi - self.s * ln_rational(&len_j).lo;
        st.holder_max = st.holder_max.max(holder.exp());

        if n < self.params.max_level() {
            let children: Vec<Interval> = (range.0..=range.1)
                .map(|c| {
                    let mut d = node.digits.clone();
                    d.push(c);
                    self.params.ln_mass_unchecked(&d).exp()
                })
                .collect();
            let sum: f64 = children.iter().map(|m| m.mid()).sum();
            let parent = ln_mu.exp().mid();
            self.consistency_nodes += 1;
            self.max_rel_err = self.max_rel_err.max((sum - parent).abs() / parent);
        }
    }
}

struct GapTrack {
    prev: Option<(BigRational, BigUint)>,
    min: Option<BigRational>,
    intervals: u64,
}

fn exhaustive_pass(params: &CantorParams, depth: usize, walker: &mut Walker, gaps: &mut [GapTrack]) -> Result<()> {
    fn rec(params: &CantorParams, node: &Node, depth: usize, walker: &mut Walker, gaps: &mut [GapTrack]) {
        let n = node.digits.len();
        let ln_mu = params.ln_mass_unchecked(&node.digits);
        walker.visit(node, ln_mu);
        let range = params.range_at(n as u64 + 1);
        let (lo, hi) = node.fundamental(range);
        let g = &mut gaps[n];
        g.intervals += 1;
        if let Some((prev_hi, prev_q)) = g.prev.take() {
            let q = if prev_q < node.q { prev_q } else { node.q.clone() };
            let ratio = (&lo - prev_hi) * BigRational::from_integer(BigInt::from(q));
            if g.min.as_ref().is_none_or(|m| &ratio < m) {
                g.min = Some(ratio);
            }
        }
        g.prev = Some((hi, node.q.clone()));
        if n < depth {
            for c in (range.0..=range.1).rev() {
                rec(params, &node.child(c), depth, walker, gaps);
            }
        }
    }
    let size: u64 = (1..=depth as u64).fold(1, |a, p| a.saturating_mul(params.count_at(p)));
    if size > super::GAP_BUDGET {
        return Err(Error::resource(
            format!("exhaustive depth {depth} has {size} words, over the budget {}", super::GAP_BUDGET),
            None,
        ));
    }
    rec(params, &Node::root(), depth, walker, gaps);
    Ok(())
}

/// Free digits pinned at 2, every special digit enumerated. The ratio
/// `μ(J_n)/|J_n|^s` does not depend on the free digits, so the per-level
/// Hölder maxima here are maxima over the whole level.
fn skeleton_pass(params: &CantorParams, from: usize, walker: &mut Walker) {
    fn rec(params: &CantorParams, node: &Node, from: usize, walker: &mut Walker) {
        let n = node.digits.len();
        if n >= from {
            walker.visit(node, params.ln_mass_unchecked(&node.digits));
        }
        if n == params.max_level() {
            return;
        }
        let p = n as u64 + 1;
        let (lo, hi) = match params.position(p) {
            Position::Free => (2, 2),
            _ => params.range_at(p),
        };
        for c in (lo..=hi).rev() {
            rec(params, &node.child(c), from, walker);
        }
    }
    rec(params, &Node::root(), from, walker);
}

fn sampled_gaps(params: &CantorParams, paths: u64, seed: u64, from: usize) -> Result<Vec<GapLevel>> {
    let top = params.max_level();
    let words: Vec<LurothWord> =
        (0..paths).into_par_iter().map(|i| sample_member(params, top, seed.wrapping_add(i))).collect::<Result<_>>()?;
    let m = BigRational::from_integer(BigInt::from(params.m));
    Ok((from..=top)
        .map(|level| {
            let mut min: Option<BigRational> = None;
            for w in &words {
                let d = &w.digits()[..level];
                let node = Node::from_digits(d);
                let range = params.range_at(level as u64 + 1);
                let (lo, hi) = node.fundamental(range);
                let (left, right) = neighbor_words(params, d);
                let qf = BigRational::from_integer(BigInt::from(node.q.clone()));
                let mut consider = |g: BigRational| {
                    let r = g * &qf;
                    if min.as_ref().is_none_or(|m| &r < m) {
                        min = Some(r);
                    }
                };
                if let Some(l) = left {
                    consider(&lo - Node::from_digits(&l).fundamental(range).1);
                }
                if let Some(r) = right {
                    consider(Node::from_digits(&r).fundamental(range).0 - &hi);
                }
            }
            let ok = min.as_ref().is_none_or(|r| r * &m >= BigRational::one());
            GapLevel {
                level,
                mode: "sampled",
                intervals: paths,
                min_ratio: min.as_ref().map_or(f64::INFINITY, rational_f64),
                ok,
            }
        })
        .collect())
}

/// Runs every invariant suite.
pub fn run_checks(params: &CantorParams, opts: &CheckOptions) -> Result<CantorReport> {
    let n1 = params.n_k[0] as usize;
    let exhaustive = opts.exhaustive_depth.unwrap_or(n1 + 1).min(params.max_level());
    let membership = membership(params)?;

    let mut walker = Walker::new(params);
    let mut tracks: Vec<GapTrack> =
        (0..=exhaustive).map(|_| GapTrack { prev: None, min: None, intervals: 0 }).collect();
    exhaustive_pass(params, exhaustive, &mut walker, &mut tracks)?;
    if opts.skeleton {
        skeleton_pass(params, exhaustive + 1, &mut walker);
    }

    let m = BigRational::from_integer(BigInt::from(params.m));
    let gaps: Vec<GapLevel> = tracks
        .iter()
        .enumerate()
        .skip(1)
        .map(|(level, g)| GapLevel {
            level,
            mode: "exhaustive",
            intervals: g.intervals,
            min_ratio: g.min.as_ref().map_or(f64::INFINITY, rational_f64),
            ok: g.min.as_ref().is_none_or(|r| r * &m >= BigRational::one()),
        })
        .collect();
    let gap_ok = gaps.iter().all(|g| g.ok);
    let sampled = if opts.sample_paths > 0 {
        sampled_gaps(params, opts.sample_paths, opts.seed, exhaustive + 1)?
    } else {
        Vec::new()
    };
    let sampled_gap_ok = sampled.iter().all(|g| g.ok);

    let visited: Vec<(usize, &LevelStats)> = walker.levels.iter().enumerate().filter(|(_, l)| l.nodes > 0).collect();
    let sandwich: Vec<SandwichLevel> = visited
        .iter()
        .map(|(level, l)| SandwichLevel {
            level: *level,
            lower_bound: l.bounds.0.mid(),
            upper_bound: l.bounds.1.mid(),
            min_ratio: l.sandwich_min,
            max_ratio: l.sandwich_max,
            nodes: l.nodes,
            violations: l.sandwich_violations,
        })
        .collect();
    let sandwich_ok = sandwich.iter().all(|l| l.violations == 0);
    let holder: Vec<HolderDepth> = visited
        .iter()
        .map(|(depth, l)| HolderDepth { depth: *depth, nodes: l.nodes, max_ratio: l.holder_max })
        .collect();
    let at = |d: usize| holder.iter().find(|h| h.depth == d).map(|h| h.max_ratio);
    let holder_growth = match (params.n_k.get(1), at(n1 + 1)) {
        (Some(&n2), Some(a)) => at(n2 as usize + 1).map(|b| b / a),
        _ => None,
    };
    let holder_ok = holder.iter().all(|h| h.max_ratio.is_finite()) && holder_growth.is_none_or(|g| g < 10.0);
    let consistency = ConsistencyReport {
        nodes_checked: walker.consistency_nodes,
        max_rel_err: walker.max_rel_err,
        ok: walker.max_rel_err <= opts.consistency_tol,
    };
    let all_pass = membership.ok && consistency.ok && gap_ok && sampled_gap_ok && sandwich_ok && holder_ok;
    Ok(CantorReport {
        params: params.clone(),
        options: opts.clone(),
        membership,
        consistency,
        gaps: gaps.into_iter().chain(sampled).collect(),
        gap_ok,
        sampled_gap_ok,
        sandwich,
        sandwich_ok,
        holder,
        holder_growth,
        holder_ok,
        all_pass,
    })
}

/// A random word of the given depth, drawn with probability `μ(J_n(w))`.
pub fn sample_member(params: &CantorParams, depth: usize, seed: u64) -> Result<LurothWord> {
    if depth > params.max_level() {
        return Err(Error::resource(
            format!("depth {depth} exceeds the schedule's last level {}", params.max_level()),
            None,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = Vec::with_capacity(depth);
    let mut ln_parent = Interval::ZERO;
    for p in 1..=depth as u64 {
        let (lo, hi) = params.range_at(p);
        let ln_children: Vec<Interval> = (lo..=hi)
            .map(|c| {
                digits.push(c);
                let l = params.ln_mass_unchecked(&digits);
                digits.pop();
                l
            })
            .collect();
        let weights: Vec<f64> = ln_children.iter().map(|l| (l.mid() - ln_parent.mid()).exp()).collect();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::Internal(format!("child masses: {e}")))?;
        let i = dist.sample(&mut rng);
        digits.push(lo + i as u64);
        ln_parent = ln_children[i];
    }
    LurothWord::new(digits)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderRow {
    pub r: f64,
    /// largest upper bound on `μ(B(x; r)) / r^s` over the sampled centres
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub samples: u64,
}

/// Upper bound on `μ([a, b])`: contained fundamental intervals count
/// exactly, ones cut by an endpoint are refined down to the last level and
/// then counted in full.
fn ball_mass(params: &CantorParams, node: &Node, a: &BigRational, b: &BigRational) -> f64 {
    let n = node.digits.len();
    let range = params.range_at(n as u64 + 1);
    let (lo, hi) = node.fundamental(range);
    if &hi < a || &lo > b {
        return 0.0;
    }
    let mu = params.ln_mass_unchecked(&node.digits).exp().hi;
    if (&lo >= a && &hi <= b) || n == params.max_level() {
        return mu;
    }
    (range.0..=range.1).map(|c| ball_mass(params, &node.child(c), a, b)).sum()
}

/// Samples centres `x ∈ E` by mass and bounds `μ(B(x; r))/r^s`.
pub fn holder_ball_scan(params: &CantorParams, radii: &[f64], samples: u64, seed: u64) -> Result<Vec<HolderRow>> {
    if samples == 0 {
        return Err(Error::validation("samples must be at least 1"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::validation(format!("radius {r} must be positive")));
    }
    let top = params.max_level();
    let centres: Vec<BigRational> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let w = sample_member(params, top, seed.wrapping_add(i))?;
            let (lo, hi) = Node::from_digits(w.digits()).fundamental(params.range_at(top as u64 + 1));
            Ok((lo + hi) / BigRational::from_integer(2.into()))
        })
        .collect::<Result<_>>()?;
    let root = Node::root();
    radii
        .iter()
        .map(|&r| {
            let rr = rational_from_f64(r)?;
            let ratios: Vec<f64> = centres
                .par_iter()
                .map(|x| {
                    let a = x - &rr;
                    let b = x + &rr;
                    ball_mass(params, &root, &a, &b).min(1.0) / r.powf(params.s)
                })
                .collect();
            Ok(HolderRow {
                r,
                max_ratio: ratios.iter().copied().fold(0.0, f64::max),
                mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
                samples,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeDump {
    pub word: String,
    pub level: usize,
    pub lower: String,
    pub upper: String,
    pub mass: f64,
}

pub const DUMP_BUDGET: u64 = 200_000;

/// Every fundamental interval down to `depth`, in pre-order.
pub fn tree_dump(params: &CantorParams, depth: usize) -> Result<Vec<NodeDump>> {
    if depth > params.max_level() {
        return Err(Error::resource(
            format!("depth {depth} exceeds the schedule's last level {}", params.max_level()),
            None,
        ));
    }
    let mut total = 1u64;
    let mut level = 1u64;
    for p in 1..=depth as u64 {
        level = level.saturating_mul(params.count_at(p));
        total = total.saturating_add(level);
    }
    if total > DUMP_BUDGET {
        return Err(Error::resource(
            format!("tree to depth {depth} has {total} nodes, over the budget {DUMP_BUDGET}"),
            None,
        ));
    }
    fn rec(params: &CantorParams, node: &Node, depth: usize, out: &mut Vec<NodeDump>) {
        let n = node.digits.len();
        let range = params.range_at(n as u64 + 1);
        let (lo, hi) = node.fundamental(range);
        out.push(NodeDump {
            word: LurothWord::new(node.digits.clone()).map(|w| w.to_string()).unwrap_or_default(),
            level: n,
            lower: lo.to_string(),
            upper: hi.to_string(),
            mass: params.ln_mass_unchecked(&node.digits).exp().mid(),
        });
        if n < depth {
            for c in (range.0..=range.1).rev() {
                rec(params, &node.child(c), depth, out);
            }
        }
    }
    let mut out = Vec::with_capacity(total as usize);
    rec(params, &Node::root(), depth, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::default_params;

    #[test]
    fn level_order_is_left_to_right() {
        let p = default_params().unwrap();
        let mut prev: Option<BigRational> = None;
        for_each_word(&p, 2, &mut |node| {
            let (lo, _) = node.fundamental(p.range_at(3));
            if let Some(q) = &prev {
                assert!(&lo > q);
            }
            prev = Some(lo);
        });
    }

    #[test]
    fn sampling_is_seeded() {
        let p = default_params().unwrap();
        let a = sample_member(&p, 8, 3).unwrap();
        assert_eq!(a, sample_member(&p, 8, 3).unwrap());
        assert_eq!(a.len(), 8);
    }

    #[test]
    fn dump_counts() {
        let p = default_params().unwrap();
        let d = tree_dump(&p, 2).unwrap();
        assert_eq!(d.len(), 1 + 9 + 81);
        assert_eq!(d[0].mass, 1.0);
    }
}
