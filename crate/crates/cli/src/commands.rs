use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use luroth_core::cantor::{self, CheckOptions};
use luroth_core::dimsolve::{self, DimKind, DimProblem, Truncation};
use luroth_core::measure::{self, PsiSpec};
use luroth_core::{Error, RealParam, WeightVector};
use serde_json::json;

use crate::output::{cell, Document, Table};

/// Working precision of the interval arithmetic, in bits.
pub const WORKING_PRECISION: u32 = 53;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "luroth", version, about = "Lüroth expansions, digit-product limsup sets and their dimensions")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Requested precision in bits (arithmetic runs at 53)
    #[arg(long, global = true, default_value_t = WORKING_PRECISION)]
    pub precision: u32,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lüroth digits of a rational, with partial sums and errors
    Expand {
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Lebesgue measure of {d_1^t_0 ⋯ d_m^t_(m-1) ≥ g}
    Tailsum {
        #[arg(long)]
        t: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Tail sums against their asymptotic order along a g grid
    Profile {
        #[arg(long)]
        t: String,
        #[arg(long, default_value = "16,256,4096,65536,1048576")]
        grid: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Continuous analogue of the tail sum for m ≤ 3 equal weights
    Khinchin {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        g: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Root of a dimension equation
    Dim {
        #[arg(long)]
        kind: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long)]
        t: Option<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Truncate the digit sum at this digit instead of bounding the tail
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// Roots of the equations truncated at each digit n
    Sequence {
        #[arg(long)]
        kind: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long)]
        t: Option<String>,
        #[arg(long, default_value = "2,4,8,16,32,64,128,256,512,1024,2048,4096")]
        n: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Roots along a B grid and along its midpoint refinement
    Scan {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        t: Option<String>,
        /// Comma list, or start:end:points for an even grid
        #[arg(long, default_value = "1.1,1.5,2,3,4,6,8")]
        grid: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Hausdorff dimension of the limsup set for Ψ
    Dimension {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        t: String,
    },
    /// Zero-one classification, series terms, window measures
    Zeroone {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        t: String,
        /// Series horizon (and Borel-Cantelli horizon)
        #[arg(long = "N", default_value_t = 100)]
        n: u64,
        /// Window N1,N2 for the union measure
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 4096)]
        digit_cap: u64,
        /// Monte Carlo samples (0 skips sampling)
        #[arg(long, default_value_t = 0)]
        samples: u64,
        /// Count window hits along sampled digit streams up to N
        #[arg(long)]
        counter: bool,
    },
    /// Build the Cantor subset and check its invariants
    Cantor {
        #[arg(long = "B", default_value = "2")]
        b: String,
        #[arg(long, default_value = "1,1")]
        t: String,
        #[arg(long = "M", default_value_t = 10)]
        m: u64,
        /// Block length (least N with α_0^N > 2 when omitted)
        #[arg(long = "N")]
        n: Option<u64>,
        #[arg(long, default_value = "2,3")]
        ell: String,
        /// Skip the invariant suites
        #[arg(long)]
        no_checks: bool,
        /// Mass-weighted random paths for the neighbour gap check
        #[arg(long, default_value_t = 2000)]
        paths: u64,
        /// Radii for the ball scan (comma list)
        #[arg(long)]
        radii: Option<String>,
        /// Ball centres for the scan
        #[arg(long, default_value_t = 200)]
        samples: u64,
        /// Dump every fundamental interval to this depth
        #[arg(long)]
        dump_depth: Option<usize>,
    },
}

fn validation(msg: impl Into<String>) -> anyhow::Error {
    Error::Validation(msg.into()).into()
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>> {
    text.split(',').map(|p| p.trim().parse::<T>().map_err(|_| validation(format!("bad {what} entry '{p}'")))).collect()
}

fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].parse().map_err(|_| validation("bad grid start"))?;
        let b: f64 = parts[1].parse().map_err(|_| validation("bad grid end"))?;
        let k: usize = parts[2].parse().map_err(|_| validation("bad grid point count"))?;
        if k < 2 || a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
            return Err(validation("grid needs start < end and at least two points"));
        }
        return Ok((0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect());
    }
    parse_list(text, "grid")
}

fn weights(text: &str) -> anyhow::Result<WeightVector> {
    Ok(WeightVector::parse(text)?)
}

fn f(x: f64) -> String {
    cell(x)
}

struct Ctx {
    config: BTreeMap<String, String>,
    seed: u64,
}

impl Ctx {
    fn set(&mut self, k: &str, v: impl ToString) {
        self.config.insert(k.to_string(), v.to_string());
    }
}

/// Runs one command and returns its document.
pub fn execute(cli: &Cli) -> anyhow::Result<Document> {
    let common = &cli.common;
    if common.precision == 0 {
        return Err(validation("precision must be at least 1 bit"));
    }
    let mut ctx = Ctx { config: BTreeMap::new(), seed: common.seed };
    ctx.set("format", common.format.name());
    ctx.set("seed", common.seed);
    ctx.set("precision", common.precision);
    ctx.set("working_precision", WORKING_PRECISION);
    ctx.set("version", env!("CARGO_PKG_VERSION"));
    match &cli.command {
        Command::Expand { x, depth } => expand(ctx, x, *depth),
        Command::Tailsum { t, g, tol } => tailsum(ctx, t, g, *tol),
        Command::Profile { t, grid, tol } => profile(ctx, t, grid, *tol),
        Command::Khinchin { m, g, tol } => khinchin(ctx, *m, *g, *tol),
        Command::Dim { kind, b, t, tol, cutoff } => dim(ctx, kind, b, t.as_deref(), *tol, *cutoff),
        Command::Sequence { kind, b, t, n, tol } => sequence(ctx, kind, b, t.as_deref(), n, *tol),
        Command::Scan { kind, t, grid, tol } => scan(ctx, kind, t.as_deref(), grid, *tol),
        Command::Dimension { psi, t } => dimension(ctx, psi, t),
        Command::Zeroone { psi, t, n, window, digit_cap, samples, counter } => {
            zeroone(ctx, psi, t, *n, window.as_deref(), *digit_cap, *samples, *counter)
        }
        Command::Cantor { b, t, m, n, ell, no_checks, paths, radii, samples, dump_depth } => cantor_cmd(
            ctx,
            CantorArgs {
                b,
                t,
                m: *m,
                n: *n,
                ell,
                checks: !no_checks,
                paths: *paths,
                radii: radii.as_deref(),
                samples: *samples,
                dump_depth: *dump_depth,
            },
        ),
    }
}

fn expand(mut ctx: Ctx, x: &str, depth: usize) -> anyhow::Result<Document> {
    ctx.set("x", x);
    ctx.set("depth", depth);
    let xv = luroth_core::parse_rational(x)?;
    let word = luroth_core::expand(&xv, depth)?;
    let mut table = Table::new("expansion", &["n", "digit", "partial_value", "error", "cylinder_length"]);
    for n in 1..=word.len() {
        let prefix = word.prefix(n);
        let value = luroth_core::evaluate(&prefix)?;
        table.push(vec![
            cell(n),
            cell(word.digits()[n - 1]),
            cell(&value),
            cell(&xv - &value),
            cell(luroth_core::cylinder_length(&prefix)),
        ]);
    }
    let mut doc = Document::new("expand", ctx.config);
    doc.set_result(&json!({ "x": x, "digits": word.digits() }))?;
    doc.tables.push(table);
    Ok(doc)
}

fn tailsum(mut ctx: Ctx, t: &str, g: &str, tol: f64) -> anyhow::Result<Document> {
    ctx.set("t", t);
    ctx.set("g", g);
    ctx.set("tol", tol);
    let w = weights(t)?;
    let gv = luroth_core::parse_rational(g)?;
    let r = luroth_core::tail_sum(&w, &gv, tol)?;
    let mut table = Table::new("tail_sum", &["g", "lower", "upper", "width", "terms"]);
    table.push(vec![g.to_string(), f(r.lower), f(r.upper), f(r.width()), cell(r.terms_enumerated)]);
    let mut doc = Document::new("tailsum", ctx.config);
    doc.set_result(&r)?;
    doc.tables.push(table);
    Ok(doc)
}

fn profile(mut ctx: Ctx, t: &str, grid: &str, tol: f64) -> anyhow::Result<Document> {
    ctx.set("t", t);
    ctx.set("grid", grid);
    ctx.set("tol", tol);
    let w = weights(t)?;
    let rows = luroth_core::asymptotic_profile(&w, &parse_grid(grid)?, tol)?;
    let mut table = Table::new("profile", &["g", "lower", "upper", "ratio_lower", "ratio_upper"]);
    for r in &rows {
        table.push(vec![f(r.g), f(r.lower), f(r.upper), f(r.ratio_lower), f(r.ratio_upper)]);
    }
    let mut doc = Document::new("profile", ctx.config);
    doc.set_result(&rows)?;
    doc.tables.push(table);
    Ok(doc)
}

fn khinchin(mut ctx: Ctx, m: u32, g: f64, tol: f64) -> anyhow::Result<Document> {
    ctx.set("m", m);
    ctx.set("g", g);
    ctx.set("tol", tol);
    let iv = luroth_core::khinchin_integral(m, g, tol)?;
    let mut table = Table::new("integral", &["m", "g", "lower", "upper"]);
    table.push(vec![cell(m), f(g), f(iv.lo), f(iv.hi)]);
    let mut doc = Document::new("khinchin", ctx.config);
    doc.set_result(&json!({ "lower": iv.lo, "upper": iv.hi }))?;
    doc.tables.push(table);
    Ok(doc)
}

fn dim_kind(ctx: &mut Ctx, kind: &str, t: Option<&str>) -> anyhow::Result<DimKind> {
    ctx.set("kind", kind);
    if let Some(t) = t {
        ctx.set("t", t);
    }
    let w = t.map(weights).transpose()?;
    Ok(DimKind::parse(kind, w.as_ref())?)
}

fn positive_b(text: &str) -> anyhow::Result<f64> {
    let b = RealParam::parse(text)?;
    if !(b.value > 1.0 && b.value.is_finite()) {
        return Err(validation(format!("B = {text} must be a finite number above 1")));
    }
    Ok(b.value)
}

fn dim(mut ctx: Ctx, kind: &str, b: &str, t: Option<&str>, tol: f64, cutoff: Option<u64>) -> anyhow::Result<Document> {
    let k = dim_kind(&mut ctx, kind, t)?;
    ctx.set("B", b);
    ctx.set("tol", tol);
    ctx.set("cutoff", cutoff.map_or("certified_tail".to_string(), |c| c.to_string()));
    let bv = positive_b(b)?;
    let sol = dimsolve::solve(&DimProblem {
        kind: k,
        b: bv,
        truncation: cutoff.map_or(Truncation::CertifiedTail, Truncation::Cutoff),
        tol,
    })?;
    let mut table = Table::new("solution", &["s_lower", "s_upper", "residual", "iterations", "cutoff"]);
    table.push(vec![f(sol.s_lower), f(sol.s_upper), f(sol.residual), cell(sol.iterations), cell(sol.cutoff)]);
    let mut doc = Document::new("dim", ctx.config);
    doc.set_result(&sol)?;
    doc.tables.push(table);
    Ok(doc)
}

fn sequence(mut ctx: Ctx, kind: &str, b: &str, t: Option<&str>, n: &str, tol: f64) -> anyhow::Result<Document> {
    let k = dim_kind(&mut ctx, kind, t)?;
    ctx.set("B", b);
    ctx.set("n", n);
    ctx.set("tol", tol);
    let bv = positive_b(b)?;
    let rows = dimsolve::solve_truncated_sequence(&k, bv, &parse_list::<u64>(n, "n")?, tol)?;
    let full = dimsolve::solve(&DimProblem::new(k, bv, tol))?;
    let mut table = Table::new("truncated", &["n", "s_lower", "s_upper"]);
    for r in &rows {
        table.push(vec![cell(r.n), f(r.s_lower), f(r.s_upper)]);
    }
    table.push(vec!["inf".into(), f(full.s_lower), f(full.s_upper)]);
    let increasing = rows.windows(2).all(|w| w[0].s_upper < w[1].s_lower);
    let mut doc = Document::new("sequence", ctx.config);
    doc.set_result(&json!({ "rows": rows, "limit": full, "strictly_increasing": increasing }))?;
    doc.tables.push(table);
    Ok(doc)
}

fn scan(mut ctx: Ctx, kind: &str, t: Option<&str>, grid: &str, tol: f64) -> anyhow::Result<Document> {
    let k = dim_kind(&mut ctx, kind, t)?;
    ctx.set("grid", grid);
    ctx.set("tol", tol);
    let rep = dimsolve::continuity_scan(&k, &parse_grid(grid)?, tol)?;
    let mut doc = Document::new("scan", ctx.config);
    for (name, rows) in [("grid", &rep.rows), ("refined", &rep.refined_rows)] {
        let mut table = Table::new(name, &["B", "s_lower", "s_upper"]);
        for r in rows.iter() {
            table.push(vec![f(r.b), f(r.s_lower), f(r.s_upper)]);
        }
        doc.tables.push(table);
    }
    let mut summary = Table::new("summary", &["monotone", "max_jump", "refined_max_jump", "jump_ratio"]);
    summary.push(vec![cell(rep.monotone), f(rep.max_jump), f(rep.refined_max_jump), f(rep.jump_ratio())]);
    doc.tables.push(summary);
    doc.set_result(&json!({ "report": rep, "jump_ratio": rep.jump_ratio() }))?;
    Ok(doc)
}

fn dimension(mut ctx: Ctx, psi: &str, t: &str) -> anyhow::Result<Document> {
    ctx.set("psi", psi);
    ctx.set("t", t);
    let p = PsiSpec::parse(psi)?;
    let w = weights(t)?;
    let r = dimsolve::dimension(&p, &w)?;
    let mut table = Table::new("dimension", &["lower", "upper", "status", "big_b", "small_b", "note"]);
    table.push(vec![
        f(r.lower),
        f(r.upper),
        serde_json::to_value(r.status)?.as_str().unwrap_or_default().to_string(),
        f(r.exponents.big_b),
        f(r.exponents.small_b),
        r.note.clone().unwrap_or_default(),
    ]);
    let mut doc = Document::new("dimension", ctx.config);
    doc.set_result(&r)?;
    doc.tables.push(table);
    Ok(doc)
}

#[allow(clippy::too_many_arguments)]
fn zeroone(
    mut ctx: Ctx,
    psi: &str,
    t: &str,
    n: u64,
    window: Option<&str>,
    digit_cap: u64,
    samples: u64,
    counter: bool,
) -> anyhow::Result<Document> {
    ctx.set("psi", psi);
    ctx.set("t", t);
    ctx.set("N", n);
    ctx.set("window", window.unwrap_or("none"));
    ctx.set("digit_cap", digit_cap);
    ctx.set("samples", samples);
    ctx.set("counter", counter);
    let p = PsiSpec::parse(psi)?;
    let w = weights(t)?;
    let verdict = measure::classify(&p, &w)?;
    let mut doc = Document::new("zeroone", ctx.config);

    let mut vt = Table::new("verdict", &["series", "measure", "big_b", "small_b", "warning"]);
    vt.push(vec![
        serde_json::to_value(verdict.series_behavior)?.as_str().unwrap_or_default().to_string(),
        serde_json::to_value(verdict.measure)?.as_str().unwrap_or_default().to_string(),
        f(verdict.exponents.big_b),
        f(verdict.exponents.small_b),
        verdict.warning.clone().unwrap_or_default(),
    ]);
    doc.tables.push(vt);

    let terms = measure::zero_one_series_terms(&p, &w, n)?;
    let mut st = Table::new("series", &["n", "term", "partial_sum"]);
    for r in &terms {
        st.push(vec![cell(r.n), f(r.term), f(r.partial_sum)]);
    }
    doc.tables.push(st);

    let mut result = json!({ "verdict": verdict });
    if let Some(win) = window {
        let ns: Vec<u64> = parse_list(win, "window")?;
        if ns.len() != 2 {
            return Err(validation("window takes two values N1,N2"));
        }
        let dp = measure::window_event_measure_dp(&p, &w, (ns[0], ns[1]), digit_cap)?;
        let mut wt = Table::new("window", &["method", "n1", "n2", "lower", "upper", "estimate", "sigma", "samples"]);
        wt.push(vec![
            "dp".into(),
            cell(ns[0]),
            cell(ns[1]),
            f(dp.lower),
            f(dp.upper),
            f(0.5 * (dp.lower + dp.upper)),
            String::new(),
            String::new(),
        ]);
        result["window_dp"] = serde_json::to_value(&dp)?;
        if samples > 0 {
            let mc = measure::window_event_mc(&p, &w, (ns[0], ns[1]), samples, ctx.seed)?;
            wt.push(vec![
                "mc".into(),
                cell(ns[0]),
                cell(ns[1]),
                String::new(),
                String::new(),
                f(mc.estimate),
                f(mc.sigma),
                cell(mc.samples),
            ]);
            result["window_mc"] = serde_json::to_value(&mc)?;
        }
        doc.tables.push(wt);
    }
    if counter {
        if samples == 0 {
            return Err(validation("--counter needs --samples > 0"));
        }
        let rows = measure::borel_cantelli_counter(&w, &p, n, samples, ctx.seed)?;
        let mut bt = Table::new(
            "counter",
            &["N", "mean_hits", "var_hits", "phi_lower", "phi_upper", "mean_excess", "sigma_mean"],
        );
        for r in &rows {
            bt.push(vec![
                cell(r.n),
                f(r.mean_hits),
                f(r.var_hits),
                f(r.phi_lower),
                f(r.phi_upper),
                f(r.mean_excess),
                f(r.sigma_mean),
            ]);
        }
        doc.tables.push(bt);
        result["counter"] = serde_json::to_value(&rows)?;
    }
    result["series_partial_sum"] = json!(terms.last().map(|r| r.partial_sum));
    doc.result = result;
    Ok(doc)
}

struct CantorArgs<'a> {
    b: &'a str,
    t: &'a str,
    m: u64,
    n: Option<u64>,
    ell: &'a str,
    checks: bool,
    paths: u64,
    radii: Option<&'a str>,
    samples: u64,
    dump_depth: Option<usize>,
}

fn cantor_cmd(mut ctx: Ctx, a: CantorArgs) -> anyhow::Result<Document> {
    ctx.set("B", a.b);
    ctx.set("t", a.t);
    ctx.set("M", a.m);
    ctx.set("N", a.n.map_or("auto".to_string(), |n| n.to_string()));
    ctx.set("ell", a.ell);
    ctx.set("checks", a.checks);
    ctx.set("paths", a.paths);
    ctx.set("radii", a.radii.unwrap_or("none"));
    ctx.set("samples", a.samples);
    ctx.set("dump_depth", a.dump_depth.map_or("none".to_string(), |d| d.to_string()));
    let params = cantor::derive_params(RealParam::parse(a.b)?, weights(a.t)?, a.m, a.n, parse_list(a.ell, "ell")?)?;
    let mut doc = Document::new("cantor", ctx.config);
    let mut pt = Table::new("params", &["name", "value"]);
    let list = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let ranges = |v: &[(u64, u64)]| v.iter().map(|(a, b)| format!("[{a},{b}]")).collect::<Vec<_>>().join(" ");
    for (k, v) in [
        ("s", f(params.s)),
        ("A", f(params.a)),
        ("alpha0", f(params.alpha0)),
        ("alpha1", f(params.alpha1)),
        ("N", cell(params.n)),
        ("n_k", list(&params.n_k)),
        ("range0", ranges(&params.range0)),
        ("range1", ranges(&params.range1)),
        ("relation_residual", f(params.relation_residual)),
    ] {
        pt.push(vec![k.into(), v]);
    }
    doc.tables.push(pt);
    let mut result = json!({ "params": params });

    if a.checks {
        let opts = CheckOptions { sample_paths: a.paths, seed: ctx.seed, ..CheckOptions::default() };
        let rep = cantor::run_checks(&params, &opts)?;
        let mut ct = Table::new("checks", &["suite", "pass", "detail"]);
        ct.push(vec![
            "membership".into(),
            cell(rep.membership.ok),
            format!("{} pairs, least log margin {}", rep.membership.pairs_checked, rep.membership.min_margin),
        ]);
        ct.push(vec![
            "consistency".into(),
            cell(rep.consistency.ok),
            format!("{} nodes, max relative error {}", rep.consistency.nodes_checked, rep.consistency.max_rel_err),
        ]);
        ct.push(vec!["gap_exhaustive".into(), cell(rep.gap_ok), String::new()]);
        ct.push(vec!["gap_sampled".into(), cell(rep.sampled_gap_ok), String::new()]);
        ct.push(vec!["sandwich".into(), cell(rep.sandwich_ok), String::new()]);
        ct.push(vec![
            "holder".into(),
            cell(rep.holder_ok),
            format!("growth {}", rep.holder_growth.map_or("n/a".to_string(), f)),
        ]);
        ct.push(vec!["all".into(), cell(rep.all_pass), String::new()]);
        doc.tables.push(ct);
        let mut gt = Table::new("gaps", &["level", "mode", "intervals", "min_ratio", "pass"]);
        for g in &rep.gaps {
            gt.push(vec![cell(g.level), g.mode.into(), cell(g.intervals), f(g.min_ratio), cell(g.ok)]);
        }
        doc.tables.push(gt);
        let mut sw = Table::new(
            "sandwich",
            &["level", "lower_bound", "upper_bound", "min_ratio", "max_ratio", "nodes", "violations"],
        );
        for s in &rep.sandwich {
            sw.push(vec![
                cell(s.level),
                f(s.lower_bound),
                f(s.upper_bound),
                f(s.min_ratio),
                f(s.max_ratio),
                cell(s.nodes),
                cell(s.violations),
            ]);
        }
        doc.tables.push(sw);
        let mut ht = Table::new("holder", &["depth", "nodes", "max_ratio"]);
        for h in &rep.holder {
            ht.push(vec![cell(h.depth), cell(h.nodes), f(h.max_ratio)]);
        }
        doc.tables.push(ht);
        result["checks"] = serde_json::to_value(&rep)?;
    }
    if let Some(r) = a.radii {
        let radii: Vec<f64> = parse_list(r, "radii")?;
        let rows = cantor::holder_ball_scan(&params, &radii, a.samples, ctx.seed)?;
        let mut bt = Table::new("ball_scan", &["r", "max_ratio", "mean_ratio", "samples"]);
        for row in &rows {
            bt.push(vec![f(row.r), f(row.max_ratio), f(row.mean_ratio), cell(row.samples)]);
        }
        doc.tables.push(bt);
        result["ball_scan"] = serde_json::to_value(&rows)?;
    }
    if let Some(d) = a.dump_depth {
        let nodes = cantor::tree_dump(&params, d)?;
        let mut tt = Table::new("tree", &["word", "level", "lower", "upper", "mass"]);
        for nd in &nodes {
            tt.push(vec![nd.word.clone(), cell(nd.level), nd.lower.clone(), nd.upper.clone(), f(nd.mass)]);
        }
        doc.tables.push(tt);
        result["tree"] = serde_json::to_value(&nodes)?;
    }
    doc.result = result;
    Ok(doc)
}
