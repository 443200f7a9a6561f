//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p isocube --test acceptance`.

use std::f64::consts::{FRAC_1_PI, PI};
use std::process::ExitCode;
use std::time::Instant;

use isocube::bounds::{cs_pointwise, jensen_gap, slicing_bound, strip_bound_check};
use isocube::candidates::{
    best_candidate, candidate_envelope, exact_profile_2d, lower_bound_profile, AxisDirection, CandidateSpec, Family,
};
use isocube::discrete::{exhaustive_min, verify_golden, VoxelSet};
use isocube::fuzz;
use isocube::gaussian::stream_rng;
use isocube::optimizer::{minimize, profile_sweep, OptimizerConfig};
use isocube::transport::{
    decomposition_check, pushforward_ks_test, restriction_area_monte_carlo, restriction_jacobian, DecompositionMethod,
};
use isocube::INV_SQRT_2PI;
use rand::Rng;

type Outcome = Result<String, String>;

/// Optimizer outputs gathered along the way, checked against the lower bound
/// by criterion 3.
struct Numerics {
    points: Vec<(usize, f64, f64)>,
}

fn ensure(ok: bool, pass: String, fail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail())
    }
}

fn interior_grid(count: usize) -> Vec<f64> {
    (1..=count).map(|k| k as f64 / (count + 1) as f64).collect()
}

fn tightness_at_half() -> Outcome {
    let v = lower_bound_profile(0.5).map_err(|e| e.to_string())?;
    ensure((v - 1.0).abs() <= 1e-12, format!("sqrt(2pi) I(1/2) = {v:.17}"), || format!("value {v:.17}"))
}

fn decomposition_identity() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for d in 1..=3 {
        for lambda in interior_grid(21) {
            let slab = CandidateSpec::axis_slab(d, lambda, AxisDirection { axis: 0, positive: true });
            let closed = decomposition_check(&slab, DecompositionMethod::ClosedForm).map_err(|e| e.to_string())?;
            let quad = decomposition_check(&slab, DecompositionMethod::Quadrature { resolution: 64 })
                .map_err(|e| e.to_string())?;
            if (closed.lhs - INV_SQRT_2PI).abs() > 1e-15 {
                return Err(format!("slab perimeter is not 1 at d={d}, lambda={lambda}"));
            }
            worst_closed = worst_closed.max(closed.margin.abs());
            worst_quad = worst_quad.max(quad.margin.abs());
        }
    }
    ensure(
        worst_closed < 1e-8 && worst_quad < 1e-3,
        format!("max gap closed form {worst_closed:.2e}, quadrature {worst_quad:.2e}"),
        || format!("closed form {worst_closed:.2e} (< 1e-8), quadrature {worst_quad:.2e} (< 1e-3)"),
    )
}

fn gaussian_lower_bound(numerics: &Numerics) -> Outcome {
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
    let mut worst = f64::INFINITY;
    for d in 1..=8 {
        let env = candidate_envelope(d, &grid).map_err(|e| e.to_string())?;
        for (lambda, value) in env.iter() {
            worst = worst.min(value - lower_bound_profile(lambda).map_err(|e| e.to_string())?);
        }
    }
    let mut worst_num = f64::INFINITY;
    for &(_, lambda, estimate) in &numerics.points {
        worst_num = worst_num.min(estimate - lower_bound_profile(lambda).map_err(|e| e.to_string())?);
    }
    ensure(
        worst >= -1e-6 && worst_num >= -1e-6,
        format!("min margin envelopes d<=8 {worst:.3e}, {} optimizer points {worst_num:.3e}", numerics.points.len()),
        || format!("envelope margin {worst:.3e}, optimizer margin {worst_num:.3e}"),
    )
}

fn exact_square_profile(numerics: &mut Numerics) -> Outcome {
    let cfg = OptimizerConfig::with_grid(256);
    let mut parts = Vec::new();
    let mut ok = true;
    for lambda in [0.1, 0.3, 0.5] {
        let r = minimize(2, lambda, &cfg).map_err(|e| e.to_string())?;
        let truth = (PI * lambda).sqrt().min(1.0);
        let rel = (r.estimate / truth - 1.0).abs();
        ok &= rel <= 0.03;
        numerics.points.push((2, lambda, r.estimate));
        parts.push(format!("{lambda}: {:.4} vs {truth:.4} ({:.2}%)", r.estimate, 100.0 * rel));
    }
    let msg = parts.join(", ");
    ensure(ok, msg.clone(), || msg)
}

fn discrete_oracle() -> Outcome {
    if !verify_golden().map_err(|e| e.to_string())? {
        return Err("table differs from the stored golden file".into());
    }
    let half = exhaustive_min(2, 4, 8, false).map_err(|e| e.to_string())?;
    let is_axis_slab = |v: &VoxelSet| {
        (0..2).any(|axis| {
            [true, false].into_iter().any(|low| {
                let slab = VoxelSet::from_fn(2, 4, |y| (y[axis] < 0.5) == low).expect("4x4 grid");
                slab.cells() == v.cells()
            })
        })
    };
    if half.min_perimeter != 1.0 || !half.optima.iter().all(is_axis_slab) {
        return Err(format!("k=8 minimum {} with {} optima", half.min_perimeter, half.optima.len()));
    }
    let single = exhaustive_min(2, 4, 1, false).map_err(|e| e.to_string())?;
    let corners: Vec<usize> = vec![0, 3, 12, 15];
    let mut found: Vec<usize> =
        single.optima.iter().map(|v| v.cells().iter().position(|&c| c).expect("one cell")).collect();
    found.sort_unstable();
    ensure(
        single.min_perimeter == 0.5 && found == corners,
        "golden table matches; k=8 -> 1.0 by axis slabs; k=1 -> 0.5 at the 4 corners".into(),
        || format!("k=1 minimum {} at cells {found:?}", single.min_perimeter),
    )
}

fn pushforward() -> Outcome {
    let n = 100_000;
    let stats = pushforward_ks_test(3, n, 2024).map_err(|e| e.to_string())?;
    let critical = 1.95 / (n as f64).sqrt();
    let worst = stats.iter().copied().fold(0.0, f64::max);
    ensure(worst < critical, format!("max KS {worst:.5} < {critical:.5}"), || format!("KS {stats:?} vs {critical}"))
}

fn restriction_area() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        for (k, a) in fuzz::invertible_matrices(d, 20, 7 + d as u64).iter().enumerate() {
            let nu = fuzz::random_unit(100 * d as u64 + k as u64, d);
            let formula = restriction_jacobian(a, &nu).map_err(|e| e.to_string())?;
            let mc = restriction_area_monte_carlo(a, &nu, 1_000_000, k as u64).map_err(|e| e.to_string())?;
            worst = worst.max((mc / formula - 1.0).abs());
        }
    }
    ensure(worst < 0.01, format!("40 matrices, max relative error {worst:.2e}"), || {
        format!("relative error {worst:.3e}")
    })
}

fn lemma_fuzz() -> Outcome {
    let mut worst_slice = f64::INFINITY;
    for cfg in fuzz::slicing_configs(1000, 11) {
        worst_slice = worst_slice.min(slicing_bound(&cfg).map_err(|e| e.to_string())?.margin);
    }
    let mut worst_strip = f64::INFINITY;
    for case in fuzz::strip_cases(1000, 12) {
        let rep = strip_bound_check(case.ell, case.q, case.deficit, &case.f).map_err(|e| e.to_string())?;
        worst_strip = worst_strip.min(rep.margin);
    }
    ensure(
        worst_slice >= -1e-9 && worst_strip >= -1e-9,
        format!("min margins: slicing {worst_slice:.3e}, strip {worst_strip:.3e}"),
        || format!("slicing {worst_slice:.3e}, strip {worst_strip:.3e}"),
    )
}

fn pointwise_steps() -> Outcome {
    let mut rng = stream_rng(99, 0);
    let mut worst_jensen = f64::INFINITY;
    for i in 0..100_000 {
        let d = rng.random_range(1..=6);
        let nu = fuzz::random_unit(i, d);
        let spread = [1.0, 4.0, 30.0][i as usize % 3];
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-spread..spread)).collect();
        worst_jensen = worst_jensen.min(jensen_gap(&nu, &x).map_err(|e| e.to_string())?);
    }
    let mut worst_cs = f64::INFINITY;
    for _ in 0..10_000 {
        let d = rng.random_range(1..=8);
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        worst_cs = worst_cs.min(cs_pointwise(&u, &v).map_err(|e| e.to_string())?.margin);
    }
    ensure(
        worst_jensen >= -1e-12 && worst_cs >= -1e-12,
        format!("min jensen gap {worst_jensen:.3e}, min cs margin {worst_cs:.3e}"),
        || format!("jensen {worst_jensen:.3e}, cs {worst_cs:.3e}"),
    )
}

fn flatness_probe(numerics: &mut Numerics) -> Outcome {
    let grid: Vec<f64> = (0..=6).map(|k| 0.44 + 0.02 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for (d, n) in [(2, 128), (3, 48)] {
        let sweep = profile_sweep(d, &grid, &OptimizerConfig::with_grid(n)).map_err(|e| e.to_string())?;
        if !sweep.failures.is_empty() {
            return Err(format!("d={d} sweep failures: {:?}", sweep.failures));
        }
        for p in &sweep.points {
            worst = worst.max((p.estimate - 1.0).abs());
            numerics.points.push((d, p.lambda, p.estimate));
        }
    }
    let mut flat = true;
    for k in 0..=1000 {
        let lambda = FRAC_1_PI + (1.0 - 2.0 * FRAC_1_PI) * k as f64 / 1000.0;
        flat &= exact_profile_2d(lambda).map_err(|e| e.to_string())? == 1.0;
    }
    flat &= exact_profile_2d(1.0 - FRAC_1_PI).map_err(|e| e.to_string())? == 1.0;
    ensure(
        worst <= 0.03 && flat,
        format!("max |estimate - 1| on [0.44, 0.56] is {worst:.2e} (d=2,3); square profile flat on [1/pi, 1-1/pi]"),
        || format!("max deviation {worst:.3e}, square profile flat: {flat}"),
    )
}

fn penalty_positive() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in 1..=3 {
        let (_, c) = best_candidate(d, 0.25).map_err(|e| e.to_string())?;
        let method = if matches!(c.family, Family::AxisSlab) {
            DecompositionMethod::ClosedForm
        } else {
            DecompositionMethod::Quadrature { resolution: 400 }
        };
        let rep = decomposition_check(&c, method).map_err(|e| e.to_string())?;
        let penalty = rep.config["penalty"].as_f64().ok_or("report has no penalty")?;
        ok &= penalty > 1e-3;
        parts.push(format!("d={d} {:?} penalty {penalty:.5}", c.family));
    }
    let msg = parts.join(", ");
    ensure(ok, msg.clone(), || msg)
}

fn dimension_monotonicity() -> Outcome {
    let grid: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
    let mut worst = f64::INFINITY;
    for d in 1..=7 {
        let low = candidate_envelope(d, &grid).map_err(|e| e.to_string())?;
        let high = candidate_envelope(d + 1, &grid).map_err(|e| e.to_string())?;
        for (a, b) in low.values().iter().zip(high.values()) {
            worst = worst.min(a - b);
        }
    }
    ensure(worst >= -1e-12, format!("min slack {worst:.3e} over d=1..7"), || format!("slack {worst:.3e}"))
}

fn main() -> ExitCode {
    let mut numerics = Numerics { points: Vec::new() };
    // Optimizer-backed criteria run first so criterion 3 sees their outputs.
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        results.push((id, name, outcome, start.elapsed().as_secs_f64()));
    };
    run(4, "exact_square_profile", &mut || exact_square_profile(&mut numerics));
    run(10, "flatness_probe", &mut || flatness_probe(&mut numerics));
    run(1, "tightness_at_half", &mut tightness_at_half);
    run(2, "decomposition_identity", &mut decomposition_identity);
    run(3, "gaussian_lower_bound", &mut || gaussian_lower_bound(&numerics));
    run(5, "discrete_oracle", &mut discrete_oracle);
    run(6, "pushforward", &mut pushforward);
    run(7, "restriction_area", &mut restriction_area);
    run(8, "lemma_fuzz", &mut lemma_fuzz);
    run(9, "pointwise_steps", &mut pointwise_steps);
    run(11, "penalty_positive", &mut penalty_positive);
    run(12, "dimension_monotonicity", &mut dimension_monotonicity);
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, outcome, secs) in &results {
        match outcome {
            Ok(msg) => println!("PASS {id:02} {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id:02} {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
