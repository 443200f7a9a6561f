//! The five subcommands. Each resolves its parameters, computes a table and
//! attaches the checks whose failure turns the exit code to 1.

use std::f64::consts::FRAC_1_PI;
use std::fmt;
use std::str::FromStr;

use isocube::bounds::{
    cs_pointwise, gaussian_isoperimetry_margin, jensen_gap, slicing_bound, strip_bound_check, IsoperimetricInput,
};
use isocube::candidates::{
    best_candidate, candidate_envelope, conjectural_profile_3d, envelope_value, exact_curve_1d, exact_curve_2d,
    exact_profile_2d, lower_bound_curve, lower_bound_profile, AxisDirection, CandidateSpec,
};
use isocube::curve::uniform_grid;
use isocube::discrete::{exhaustive_min, gaussian_floor, verify_golden, VoxelSet};
use isocube::fuzz;
use isocube::gaussian::stream_rng;
use isocube::optimizer::{minimize, profile_sweep, InitMode, OptimizerConfig, MAX_OPT_DIMENSION};
use isocube::transport::{
    boundary_weight, decomposition_check, pushforward_ks_test, restriction_area_monte_carlo, restriction_jacobian,
    transported_candidate_surface, DecompositionMethod, HalfspaceSpec,
};
use isocube::{BoundReport, Error, ProfileCurve, SQRT_2PI};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{load_config, List, Resolver};
use crate::report::{Check, Column, Format, Report};
use crate::{Cli, CliError, Command, OptimizeArgs, OracleArgs, ProfileArgs, VerifyArgs};

macro_rules! name_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $ty {
            $($variant),+
        }

        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $text),+
                }
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($ty::$variant),)+
                    other => Err(format!(
                        "unknown value `{other}` (expected one of: {})",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
    };
}

name_enum!(Source { Exact => "exact", Candidate => "candidate", LowerBound => "lower_bound", Numerical => "numerical" });
name_enum!(Suite {
    Transport => "transport",
    Lemmas => "lemmas",
    Oracle => "oracle",
    Optimizer => "optimizer",
    All => "all",
});
name_enum!(InitName { Slab => "slab", CornerBall => "corner_ball", Random => "random", BestCandidate => "best_candidate" });
name_enum!(DumpFormat { Binary => "binary", Text => "text" });

impl InitName {
    fn mode(self) -> InitMode {
        match self {
            InitName::Slab => InitMode::Slab,
            InitName::CornerBall => InitMode::CornerBall,
            InitName::Random => InitMode::Random,
            InitName::BestCandidate => InitMode::BestCandidate,
        }
    }
}

/// Resolves the common flags, runs the subcommand and returns the report
/// together with the output format.
pub fn execute(cli: &Cli) -> Result<(Report, Format), CliError> {
    let file = match &cli.common.config {
        Some(path) => load_config(path)?,
        None => Default::default(),
    };
    let mut r = Resolver::new(file);
    let format = r.get("format", cli.common.format, Format::Csv)?;
    let seed = r.get("seed", cli.common.seed, 0u64)?;
    let report = match &cli.command {
        Command::Profile(args) => profile(r, args, seed)?,
        Command::Verify(args) => verify(r, args, seed)?,
        Command::Figure1 => figure1(r)?,
        Command::Oracle(args) => oracle(r, args)?,
        Command::Optimize(args) => optimize(r, args, seed)?,
    };
    Ok((report, format))
}

fn lambda_column() -> Column {
    Column::new("lambda", "grid")
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn default_numerical_grid(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 64,
        3 => 32,
        _ => 16,
    }
}

fn volume_grid(r: &mut Resolver, points: Option<usize>, lambdas: Option<List<f64>>) -> Result<Vec<f64>, CliError> {
    let lambdas = r.opt("lambdas", lambdas, None)?;
    let points = r.opt("points", points, None)?;
    match (lambdas, points) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --lambdas or --points, not both".into())),
        (Some(List(l)), None) => {
            if l.is_empty() {
                return Err(CliError::Usage("--lambdas is empty".into()));
            }
            Ok(l)
        }
        (None, p) => {
            let p = p.unwrap_or(101);
            r.note("points", json!(p));
            Ok(uniform_grid(p)?)
        }
    }
}

fn profile(mut r: Resolver, args: &ProfileArgs, seed: u64) -> Result<Report, CliError> {
    let d = r.get("dimension", args.dimension, 2usize)?;
    let lambdas = volume_grid(&mut r, args.points, args.lambdas.clone())?;
    let List(sources) = r.get("sources", args.sources.clone(), List(vec![Source::Candidate, Source::LowerBound]))?;
    if sources.is_empty() {
        return Err(CliError::Usage("the source set is empty".into()));
    }
    let wants_numerical = sources.contains(&Source::Numerical);
    let grid = if wants_numerical {
        Some(r.get("grid", args.grid, default_numerical_grid(d))?)
    } else {
        r.opt("grid", args.grid, None)?
    };
    let config = r.finish()?;

    let mut report = Report::new("profile", config);
    report.columns.push(lambda_column());
    let mut columns: Vec<Vec<Value>> = Vec::new();
    let mut candidate: Option<ProfileCurve> = None;
    let mut lower: Option<ProfileCurve> = None;
    for &source in &sources {
        let name = match source {
            Source::LowerBound => "lower_bound_dinf".to_string(),
            s => format!("{}_d{d}", s.as_str()),
        };
        let values: Vec<Value> = match source {
            Source::Exact => {
                let curve = match d {
                    1 => exact_curve_1d(&lambdas)?,
                    2 => exact_curve_2d(&lambdas)?,
                    _ => return Err(Error::Unsupported(format!("no exact profile is known for d = {d}")).into()),
                };
                curve.values().iter().map(|&v| num(v)).collect()
            }
            Source::Candidate => {
                let curve = candidate_envelope(d, &lambdas)?;
                let out = curve.values().iter().map(|&v| num(v)).collect();
                candidate = Some(curve);
                out
            }
            Source::LowerBound => {
                let curve = lower_bound_curve(&lambdas)?;
                let out = curve.values().iter().map(|&v| num(v)).collect();
                lower = Some(curve);
                out
            }
            Source::Numerical => {
                if d > MAX_OPT_DIMENSION {
                    return Err(Error::Unsupported(format!(
                        "the numerical source supports d <= {MAX_OPT_DIMENSION}, got {d}"
                    ))
                    .into());
                }
                let cfg = OptimizerConfig { seed, ..OptimizerConfig::with_grid(grid.expect("resolved above")) };
                let sweep = profile_sweep(d, &lambdas, &cfg)?;
                report.checks.push(Check::new(
                    "numerical_failures",
                    sweep.failures.is_empty(),
                    sweep.failures.len() as f64,
                    sweep.failures.iter().map(|f| format!("{}: {}", f.lambda, f.reason)).collect::<Vec<_>>().join("; "),
                ));
                lambdas
                    .iter()
                    .map(|&l| sweep.curve.iter().find(|&(x, _)| x == l).map_or(Value::Null, |(_, v)| num(v)))
                    .collect()
            }
        };
        report.columns.push(Column::new(name, source.as_str()));
        columns.push(values);
    }
    if let (Some(c), Some(l)) = (&candidate, &lower) {
        let worst = c.values().iter().zip(l.values()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
        report.checks.push(Check::new(
            "candidate_dominates_lower_bound",
            worst >= -1e-12,
            worst,
            "min over rows of candidate - lower_bound",
        ));
    }
    report.rows = lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| std::iter::once(num(l)).chain(columns.iter().map(|c| c[i].clone())).collect())
        .collect();
    Ok(report)
}

/// Running tally for one inequality family.
struct Tally {
    name: &'static str,
    tol: f64,
    checks: usize,
    min_margin: f64,
    max_abs_margin: f64,
    failures: Vec<Value>,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Self { name, tol, checks: 0, min_margin: f64::INFINITY, max_abs_margin: 0.0, failures: Vec::new() }
    }

    fn margin(&mut self, margin: f64, context: impl FnOnce() -> Value) {
        self.checks += 1;
        self.min_margin = self.min_margin.min(margin);
        self.max_abs_margin = self.max_abs_margin.max(margin.abs());
        if !(margin >= -self.tol) {
            self.failures.push(json!({ "family": self.name, "margin": num(margin), "context": context() }));
        }
    }

    fn report(&mut self, rep: &BoundReport) {
        self.margin(rep.margin, || serde_json::to_value(rep).unwrap_or(Value::Null));
    }

    /// A yes/no invariant, counted with margin 0 or -1.
    fn holds(&mut self, ok: bool, context: impl FnOnce() -> Value) {
        self.margin(if ok { 0.0 } else { -1.0 }, context);
    }

    fn error(&mut self, e: Error, context: Value) {
        self.checks += 1;
        self.failures.push(json!({ "family": self.name, "error": e.to_string(), "context": context }));
    }
}

fn interior(count: usize) -> Vec<f64> {
    (1..=count).map(|k| k as f64 / (count + 1) as f64).collect()
}

fn suite_transport(seed: u64) -> Vec<Tally> {
    let mut closed = Tally::new("decomposition_closed_form", 1e-8);
    let mut quad = Tally::new("decomposition_quadrature", 1e-3);
    for d in 1..=3 {
        for lambda in interior(21) {
            let slab = CandidateSpec::axis_slab(d, lambda, AxisDirection { axis: 0, positive: true });
            let ctx = || json!({ "d": d, "lambda": lambda });
            // The identity is an equality, so both signs of the margin count.
            match decomposition_check(&slab, DecompositionMethod::ClosedForm) {
                Ok(rep) => closed.margin(-rep.margin.abs(), ctx),
                Err(e) => closed.error(e, ctx()),
            }
            match decomposition_check(&slab, DecompositionMethod::Quadrature { resolution: 64 }) {
                Ok(rep) => quad.margin(-rep.margin.abs(), ctx),
                Err(e) => quad.error(e, ctx()),
            }
        }
    }

    let n = 100_000;
    let critical = 1.95 / (n as f64).sqrt();
    let mut ks = Tally::new("pushforward_ks", 0.0);
    match pushforward_ks_test(3, n, seed) {
        Ok(stats) => {
            for (axis, s) in stats.into_iter().enumerate() {
                ks.margin(critical - s, || json!({ "axis": axis, "statistic": s, "critical": critical }));
            }
        }
        Err(e) => ks.error(e, json!({ "d": 3, "n": n })),
    }

    let mut area = Tally::new("restriction_area", 0.0);
    for d in [2, 3] {
        for (k, a) in fuzz::invertible_matrices(d, 10, seed.wrapping_add(7 + d as u64)).iter().enumerate() {
            let nu = fuzz::random_unit(seed.wrapping_add(100 * d as u64 + k as u64), d);
            let ctx = || json!({ "d": d, "matrix": a, "normal": nu });
            let formula = restriction_jacobian(a, &nu);
            let mc = restriction_area_monte_carlo(a, &nu, 1_000_000, seed.wrapping_add(k as u64));
            match (formula, mc) {
                (Ok(f), Ok(m)) => area.margin(0.01 - (m / f - 1.0).abs(), ctx),
                (Err(e), _) | (_, Err(e)) => area.error(e, ctx()),
            }
        }
    }

    let mut weight = Tally::new("boundary_weight", 1e-12);
    let mut rng = stream_rng(seed, 21);
    for i in 0..10_000u64 {
        let d = rng.random_range(1..=6);
        let nu = fuzz::random_unit(seed.wrapping_add(i), d);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        match boundary_weight(&x, &nu) {
            Ok(w) => weight.margin(w / SQRT_2PI - 1.0, || json!({ "x": x, "normal": nu })),
            Err(e) => weight.error(e, json!({ "x": x, "normal": nu })),
        }
    }
    vec![closed, quad, ks, area, weight]
}

fn suite_lemmas(seed: u64) -> Vec<Tally> {
    let mut slicing = Tally::new("slicing", 1e-9);
    for cfg in fuzz::slicing_configs(1000, seed.wrapping_add(11)) {
        match slicing_bound(&cfg) {
            Ok(rep) => slicing.report(&rep),
            Err(e) => slicing.error(e, serde_json::to_value(&cfg).unwrap_or(Value::Null)),
        }
    }
    let mut strip = Tally::new("strip", 1e-9);
    for case in fuzz::strip_cases(1000, seed.wrapping_add(12)) {
        match strip_bound_check(case.ell, case.q, case.deficit, &case.f) {
            Ok(rep) => strip.report(&rep),
            Err(e) => strip.error(e, json!({ "ell": case.ell, "q": case.q, "deficit": case.deficit })),
        }
    }

    let mut rng = stream_rng(seed, 99);
    let mut jensen = Tally::new("jensen", 1e-12);
    for i in 0..100_000u64 {
        let d = rng.random_range(1..=6);
        let nu = fuzz::random_unit(seed.wrapping_add(i), d);
        let spread = [1.0, 4.0, 30.0][i as usize % 3];
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-spread..spread)).collect();
        match jensen_gap(&nu, &x) {
            Ok(g) => jensen.margin(g, || json!({ "normal": nu, "x": x })),
            Err(e) => jensen.error(e, json!({ "normal": nu, "x": x })),
        }
    }
    let mut cs = Tally::new("cs", 1e-12);
    for _ in 0..10_000 {
        let d = rng.random_range(1..=8);
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        match cs_pointwise(&u, &v) {
            Ok(rep) => cs.report(&rep),
            Err(e) => cs.error(e, json!({ "u": u, "v": v })),
        }
    }

    let mut iso = Tally::new("gaussian_isoperimetry", 1e-3);
    for lambda in interior(9) {
        let h = HalfspaceSpec::axis(3, 0, isocube::gaussian::std_normal_quantile(lambda).expect("interior volume"))
            .expect("valid axis");
        match gaussian_isoperimetry_margin(IsoperimetricInput::Halfspace(&h), lambda) {
            Ok(rep) => iso.report(&rep),
            Err(e) => iso.error(e, json!({ "lambda": lambda })),
        }
        for d in 2..=3 {
            let ctx = json!({ "d": d, "lambda": lambda });
            let res = best_candidate(d, lambda)
                .and_then(|(_, c)| transported_candidate_surface(&c, 200))
                .and_then(|s| gaussian_isoperimetry_margin(IsoperimetricInput::Surface(&s), lambda));
            match res {
                Ok(rep) => iso.report(&rep),
                Err(e) => iso.error(e, ctx),
            }
        }
    }
    vec![slicing, strip, jensen, cs, iso]
}

fn is_axis_slab(v: &VoxelSet) -> bool {
    let (d, n) = (v.dimension(), v.grid_n());
    (0..d).any(|axis| {
        [true, false]
            .into_iter()
            .any(|low| VoxelSet::from_fn(d, n, |y| (y[axis] < 0.5) == low).is_ok_and(|slab| slab.cells() == v.cells()))
    })
}

fn suite_oracle() -> Vec<Tally> {
    let mut golden = Tally::new("golden_d2_n4", 0.0);
    match verify_golden() {
        Ok(ok) => golden.holds(ok, || json!("enumerated table differs from the stored golden file")),
        Err(e) => golden.error(e, json!({ "d": 2, "n": 4 })),
    }

    let mut shapes = Tally::new("corners_and_slabs", 0.0);
    match exhaustive_min(2, 4, 8, false) {
        Ok(half) => shapes.holds(
            half.min_perimeter == 1.0 && half.optima.iter().all(is_axis_slab),
            || json!({ "k": 8, "min_perimeter": half.min_perimeter, "optima": half.optima.len() }),
        ),
        Err(e) => shapes.error(e, json!({ "k": 8 })),
    }
    match exhaustive_min(2, 4, 1, false) {
        Ok(single) => {
            let mut cells: Vec<usize> =
                single.optima.iter().filter_map(|v| v.cells().iter().position(|&c| c)).collect();
            cells.sort_unstable();
            shapes.holds(
                single.min_perimeter == 0.5 && cells == [0, 3, 12, 15],
                || json!({ "k": 1, "min_perimeter": single.min_perimeter, "cells": cells }),
            );
        }
        Err(e) => shapes.error(e, json!({ "k": 1 })),
    }

    let mut floor = Tally::new("gaussian_floor", 1e-12);
    for (d, n) in [(1usize, 16usize), (2, 4), (2, 5)] {
        let total = n.pow(d as u32);
        for k in 1..total {
            let ctx = json!({ "d": d, "n": n, "k": k });
            match exhaustive_min(d, n, k, true).and_then(|r| Ok((r.min_perimeter, gaussian_floor(d, n, k)?))) {
                Ok((p, f)) => floor.margin(p - f, || ctx),
                Err(e) => floor.error(e, ctx),
            }
        }
    }
    vec![golden, shapes, floor]
}

fn suite_optimizer(seed: u64) -> Vec<Tally> {
    let cfg = |n: usize| OptimizerConfig { seed, ..OptimizerConfig::with_grid(n) };

    let mut line = Tally::new("interval_flatness", 0.0);
    let grid: Vec<f64> = interior(19);
    match profile_sweep(1, &grid, &cfg(256)) {
        Ok(sweep) => {
            for p in &sweep.points {
                line.margin(
                    0.02 - (p.estimate - 1.0).abs(),
                    || json!({ "d": 1, "lambda": p.lambda, "estimate": p.estimate }),
                );
            }
            for f in sweep.failures {
                line.holds(false, || json!({ "d": 1, "lambda": f.lambda, "reason": f.reason }));
            }
        }
        Err(e) => line.error(e, json!({ "d": 1 })),
    }

    let mut sandwich = Tally::new("square_sandwich", 1e-6);
    let mut exact = Tally::new("square_exact", 0.0);
    match profile_sweep(2, &interior(19), &cfg(64)) {
        Ok(sweep) => {
            for p in &sweep.points {
                let ctx = || json!({ "d": 2, "lambda": p.lambda, "estimate": p.estimate });
                let low = lower_bound_profile(p.lambda).unwrap_or(f64::NAN);
                let high = 1.05 * envelope_value(2, p.lambda).unwrap_or(f64::NAN);
                sandwich.margin((p.estimate - low).min(high - p.estimate), ctx);
                let truth = exact_profile_2d(p.lambda).unwrap_or(f64::NAN);
                exact.margin(0.03 - (p.estimate / truth - 1.0).abs(), ctx);
            }
            for f in sweep.failures {
                sandwich.holds(false, || json!({ "d": 2, "lambda": f.lambda, "reason": f.reason }));
            }
        }
        Err(e) => sandwich.error(e, json!({ "d": 2 })),
    }

    let mut flat = Tally::new("flatness_near_half", 0.0);
    let near: Vec<f64> = (0..=6).map(|k| 0.44 + 0.02 * k as f64).collect();
    for (d, n) in [(2, 128), (3, 48)] {
        match profile_sweep(d, &near, &cfg(n)) {
            Ok(sweep) => {
                for p in &sweep.points {
                    flat.margin(
                        0.03 - (p.estimate - 1.0).abs(),
                        || json!({ "d": d, "lambda": p.lambda, "estimate": p.estimate }),
                    );
                }
                for f in sweep.failures {
                    flat.holds(false, || json!({ "d": d, "lambda": f.lambda, "reason": f.reason }));
                }
            }
            Err(e) => flat.error(e, json!({ "d": d })),
        }
    }

    let mut mirror = Tally::new("complement_symmetry", 0.0);
    for lambda in [0.15, 0.35] {
        let ctx = json!({ "d": 2, "lambda": lambda });
        match minimize(2, lambda, &cfg(64)).and_then(|a| Ok((a, minimize(2, 1.0 - lambda, &cfg(64))?))) {
            Ok((a, b)) => mirror.margin(0.02 - (a.estimate / b.estimate - 1.0).abs(), || ctx),
            Err(e) => mirror.error(e, ctx),
        }
    }
    vec![line, sandwich, exact, flat, mirror]
}

fn verify(mut r: Resolver, args: &VerifyArgs, seed: u64) -> Result<Report, CliError> {
    let suite = r.get("suite", args.suite, Suite::All)?;
    let config = r.finish()?;
    let mut tallies = Vec::new();
    let run_all = suite == Suite::All;
    if run_all || suite == Suite::Transport {
        tallies.extend(suite_transport(seed));
    }
    if run_all || suite == Suite::Lemmas {
        tallies.extend(suite_lemmas(seed));
    }
    if run_all || suite == Suite::Oracle {
        tallies.extend(suite_oracle());
    }
    if run_all || suite == Suite::Optimizer {
        tallies.extend(suite_optimizer(seed));
    }

    let mut report = Report::new("verify", config);
    report.columns = ["family", "checks", "failures", "min_margin", "max_abs_margin", "tolerance"]
        .into_iter()
        .map(|c| Column::new(c, "check"))
        .collect();
    let mut failures = Vec::new();
    for t in tallies {
        report.rows.push(vec![
            json!(t.name),
            json!(t.checks),
            json!(t.failures.len()),
            num(t.min_margin),
            num(t.max_abs_margin),
            num(t.tol),
        ]);
        report.checks.push(Check::new(
            t.name,
            t.failures.is_empty() && t.checks > 0,
            t.min_margin,
            format!("{} checks, {} failures", t.checks, t.failures.len()),
        ));
        failures.extend(t.failures);
    }
    report.extra = Some(("failures".into(), Value::Array(failures)));
    Ok(report)
}

fn figure1(mut r: Resolver) -> Result<Report, CliError> {
    let points = 1001;
    r.note("points", json!(points));
    let config = r.finish()?;
    let lambdas = uniform_grid(points)?;
    let d1 = exact_curve_1d(&lambdas)?;
    let d2 = exact_curve_2d(&lambdas)?;
    let d3 = candidate_envelope(3, &lambdas)?;
    let lb = lower_bound_curve(&lambdas)?;

    let mut report = Report::new("figure1", config);
    report.columns = vec![
        lambda_column(),
        Column::new("exact_d1", "exact"),
        Column::new("exact_d2", "exact"),
        Column::new("candidate_d3", "candidate"),
        Column::new("lower_bound_dinf", "lower_bound"),
    ];
    report.rows = (0..points)
        .map(|i| {
            vec![num(lambdas[i]), num(d1.values()[i]), num(d2.values()[i]), num(d3.values()[i]), num(lb.values()[i])]
        })
        .collect();

    let concave = [&d1, &d2, &d3].iter().map(|c| c.concavity_defect()).fold(0.0, f64::max);
    report.checks.push(Check::new("concavity", concave <= 1e-6, concave, "max discrete second derivative"));

    let slack = d3.values().iter().zip(lb.values()).map(|(c, l)| c - l).fold(f64::INFINITY, f64::min);
    report.checks.push(Check::new(
        "lower_bound_dominated",
        slack >= -1e-12,
        slack,
        "min of candidate_d3 - lower_bound",
    ));
    let gap = d3.values().iter().zip(lb.values()).map(|(c, l)| c - l).fold(0.0, f64::max);
    report.checks.push(Check::new("lower_bound_close", gap <= FIGURE_GAP, gap, "max of candidate_d3 - lower_bound"));

    let half = points / 2;
    let at_half = [d1.values()[half], d2.values()[half], d3.values()[half], conjectural_profile_3d(0.5)?];
    let mut flat_ok = at_half.iter().all(|&v| v == 1.0);
    let mut lambda = FRAC_1_PI;
    while lambda <= 1.0 - FRAC_1_PI {
        flat_ok &= exact_profile_2d(lambda)? == 1.0;
        lambda += 1e-3;
    }
    report.checks.push(Check::new(
        "flat_near_half",
        flat_ok,
        d2.values()[half],
        "value 1 at 1/2 for every d; square flat on [1/pi, 1-1/pi]",
    ));

    let mono = (0..points)
        .map(|i| (d1.values()[i] - d2.values()[i]).min(d2.values()[i] - d3.values()[i]))
        .fold(f64::INFINITY, f64::min);
    report.checks.push(Check::new("dimension_monotone", mono >= -1e-12, mono, "min of d1 - d2 and d2 - d3"));

    let tight = lb.values()[half];
    report.checks.push(Check::new(
        "tight_at_half",
        tight == 1.0 && d3.values()[half] == tight && (lower_bound_profile(0.5)? - 1.0).abs() <= 1e-12,
        tight,
        "lower bound equals the cube value at 1/2",
    ));
    Ok(report)
}

/// Largest accepted pointwise gap between the d = 3 candidate curve and the
/// Gaussian bound on the 1001-point grid.
const FIGURE_GAP: f64 = 0.15;

fn oracle(mut r: Resolver, args: &OracleArgs) -> Result<Report, CliError> {
    let d = r.get("dimension", args.dimension, 2usize)?;
    let n = r.get("grid", args.grid, 4usize)?;
    let k = r.opt("k", args.k, None)?;
    let symmetry = r.switch("symmetry", args.symmetry)?;
    let golden = r.switch("golden", args.golden)?;
    let config = r.finish()?;
    if golden && (d, n) != (2, 4) {
        return Err(CliError::Usage("the golden table covers d=2, n=4 only".into()));
    }
    let total = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    let counts: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..=(total / 2).min(usize::MAX as u128) as usize).collect(),
    };

    let mut report = Report::new("oracle", config);
    report.columns = vec![
        Column::new("k", "grid"),
        Column::new("min_faces", "exact"),
        Column::new("min_perimeter", "exact"),
        Column::new("optima", "exact"),
        Column::new("subsets_examined", "exact"),
        Column::new("gaussian_floor", "lower_bound"),
    ];
    let mut worst = f64::INFINITY;
    let mut last = None;
    for k in counts {
        let res = exhaustive_min(d, n, k, symmetry)?;
        let floor = gaussian_floor(d, n, k)?;
        worst = worst.min(res.min_perimeter - floor);
        report.rows.push(vec![
            json!(k),
            json!(res.min_faces),
            num(res.min_perimeter),
            json!(res.optima.len()),
            json!(res.subsets_examined),
            num(floor),
        ]);
        last = Some(res);
    }
    report.checks.push(Check::new(
        "above_gaussian_floor",
        worst >= -1e-12,
        worst,
        "min of min_perimeter - gaussian_floor",
    ));
    if golden {
        let ok = verify_golden()?;
        report.checks.push(Check::new("golden_table", ok, if ok { 1.0 } else { 0.0 }, "d=2, n=4, k=1..8"));
    }
    if let (Some(_), Some(res)) = (k, last) {
        let shapes: Vec<Value> = res.optima.iter().map(|v| json!(v.to_bit_matrix())).collect();
        report.extra = Some(("optima".into(), Value::Array(shapes)));
    }
    Ok(report)
}

fn optimize(mut r: Resolver, args: &OptimizeArgs, seed: u64) -> Result<Report, CliError> {
    let d = r.get("dimension", args.dimension, 2usize)?;
    let lambda = r.opt("lambda", args.lambda, None)?;
    let lambdas = r.opt("lambdas", args.lambdas.clone(), None)?;
    let defaults = OptimizerConfig::with_grid(default_numerical_grid(d));
    let grid_n = r.get("grid", args.grid, defaults.grid_n)?;
    let init = r.get("init", args.init, InitName::BestCandidate)?;
    let List(epsilon_cells) = r.get("epsilon", args.epsilon.clone(), List(defaults.epsilon_cells.clone()))?;
    let step = r.get("step", args.step, defaults.step)?;
    let max_iterations = r.get("max_iterations", args.max_iterations, defaults.max_iterations)?;
    let sigma_cells = r.get("sigma", args.sigma, defaults.sigma_cells)?;
    let refine_steps = r.get("refine_steps", args.refine_steps, defaults.refine_steps)?;
    let dump = r.opt("dump", args.dump.as_ref().map(|p| p.display().to_string()), None)?;
    let dump_format = r.get("dump_format", args.dump_format, DumpFormat::Binary)?;
    let config = r.finish()?;

    let cfg = OptimizerConfig {
        grid_n,
        epsilon_cells,
        step,
        max_iterations,
        sigma_cells,
        refine_steps,
        seed,
        init: init.mode(),
        ..defaults
    };
    let mut report = Report::new("optimize", config);
    report.columns = vec![
        lambda_column(),
        Column::new(format!("numerical_d{d}"), "numerical"),
        Column::new("error_bar", "numerical"),
        Column::new("lower_bound_dinf", "lower_bound"),
        Column::new(format!("candidate_d{d}"), "candidate"),
        Column::new("converged", "numerical"),
    ];
    let mut points = Vec::new();
    match (lambda, lambdas) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(CliError::Usage("give exactly one of --lambda and --lambdas".into()));
        }
        (Some(lambda), None) => {
            let out = minimize(d, lambda, &cfg)?;
            if let Some(path) = &dump {
                let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
                let written = match dump_format {
                    DumpFormat::Binary => out.field.write_binary(std::io::BufWriter::new(file)),
                    DumpFormat::Text => out.field.write_text(std::io::BufWriter::new(file)),
                };
                written.map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            }
            report.checks.push(Check::new(
                "volume",
                out.diagnostics.volume_error <= cfg.volume_tol,
                out.diagnostics.volume_error,
                "final |mean - lambda|",
            ));
            points.push((lambda, out.estimate, out.diagnostics.error_bar, out.diagnostics.converged));
            report.extra = Some(("diagnostics".into(), serde_json::to_value(&out.diagnostics).unwrap_or(Value::Null)));
        }
        (None, Some(List(lambdas))) => {
            if dump.is_some() {
                return Err(CliError::Usage("--dump needs a single --lambda".into()));
            }
            let sweep = profile_sweep(d, &lambdas, &cfg)?;
            report.checks.push(Check::new(
                "sweep_failures",
                sweep.failures.is_empty(),
                sweep.failures.len() as f64,
                sweep.failures.iter().map(|f| format!("{}: {}", f.lambda, f.reason)).collect::<Vec<_>>().join("; "),
            ));
            for (l, v) in sweep.curve.iter() {
                match sweep.points.iter().find(|p| p.lambda == l) {
                    Some(p) => points.push((l, p.estimate, p.error_bar, p.converged)),
                    None => points.push((l, v, 0.0, true)),
                }
            }
        }
    }

    let mut low_slack = f64::INFINITY;
    let mut high_slack = f64::INFINITY;
    for &(l, estimate, error_bar, converged) in &points {
        let low = lower_bound_profile(l)?;
        let env = envelope_value(d, l)?;
        low_slack = low_slack.min(estimate - low);
        high_slack = high_slack.min(1.05 * env - estimate);
        report.rows.push(vec![num(l), num(estimate), num(error_bar), num(low), num(env), json!(converged)]);
    }
    report.checks.push(Check::new("above_lower_bound", low_slack >= -1e-6, low_slack, "min of estimate - lower_bound"));
    // Other starts may settle in a worse local minimum, which is not a defect.
    if init == InitName::BestCandidate {
        report.checks.push(Check::new(
            "below_candidate",
            high_slack >= 0.0,
            high_slack,
            "min of 1.05 * candidate - estimate",
        ));
    }
    Ok(report)
}
