//! Seeded random configurations for the inequality checks: the fuzz tests,
//! the acceptance suite and the `verify` command all draw from here.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{MonotoneFn, Perturbation, SlicingConfig};
use crate::gaussian::{std_normal_pdf, stream_rng};
use crate::transport::HalfspaceSpec;

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn slab(rng: &mut ChaCha8Rng, spread: f64) -> (f64, f64) {
    let a = rng.random_range(-spread..spread);
    (a, a + rng.random_range(0.0..spread))
}

/// Half-spaces with piecewise graph offsets, added and carved slabs.
pub fn slicing_configs(count: usize, seed: u64) -> Vec<SlicingConfig> {
    let mut rng = stream_rng(seed, 51);
    (0..count)
        .map(|_| {
            let d = rng.random_range(1..=4);
            let offset = rng.random_range(-2.5..2.5);
            let halfspace = HalfspaceSpec::new(unit_vector(&mut rng, d), offset).expect("unit normal");
            let r = rng.random_range(0.02..2.0);
            // Equality and near-equality cases: F = H, or a tiny translate.
            match rng.random_range(0..10) {
                0 => return SlicingConfig { halfspace, r, perturbation: Perturbation::none() },
                1 => {
                    let shift = rng.random_range(-1e-3..1e-3);
                    return SlicingConfig { halfspace, r, perturbation: Perturbation::shift(shift) };
                }
                _ => {}
            }
            let pieces = if d == 1 { 1 } else { rng.random_range(1..=5) };
            let mut breakpoints: Vec<f64> = (1..pieces).map(|_| rng.random_range(-3.0..3.0)).collect();
            breakpoints.sort_by(f64::total_cmp);
            breakpoints.dedup();
            let scale = [0.05, 0.5, 2.0][rng.random_range(0..3)];
            let offsets = (0..=breakpoints.len()).map(|_| rng.random_range(-scale..scale)).collect();
            let added = (0..rng.random_range(0..3)).map(|_| slab(&mut rng, 2.0)).collect();
            let carved = (0..rng.random_range(0..3)).map(|_| slab(&mut rng, 2.0)).collect();
            SlicingConfig { halfspace, r, perturbation: Perturbation { breakpoints, offsets, added, carved } }
        })
        .collect()
}

/// Arguments of one strip-bound evaluation.
pub struct StripCase {
    pub ell: f64,
    pub q: f64,
    pub deficit: f64,
    pub f: MonotoneFn,
}

/// Distances, tilts, removed weights and nondecreasing test functions.
pub fn strip_cases(count: usize, seed: u64) -> Vec<StripCase> {
    let mut rng = stream_rng(seed, 52);
    (0..count)
        .map(|_| {
            let ell = rng.random_range(0.05..4.0);
            let q = match rng.random_range(0..5) {
                0 => 0.0,
                1 => [-1.0, 1.0][rng.random_range(0..2)],
                _ => rng.random_range(-1.0..1.0),
            };
            let deficit = rng.random_range(0.0..1.2) * std_normal_pdf(ell) * rng.random::<f64>();
            let f = match rng.random_range(0..4) {
                0 => MonotoneFn::constant(rng.random_range(0.0..3.0)),
                1 => MonotoneFn::gaussian_growth(),
                2 => {
                    let terms = (0..rng.random_range(1..4))
                        .map(|_| (rng.random_range(0.0..2.0), rng.random_range(-1.0..3.0), rng.random_range(0.0..2.0)))
                        .collect();
                    MonotoneFn::piecewise_exp(terms).expect("valid terms")
                }
                _ => {
                    let p = rng.random_range(0.5..3.0);
                    MonotoneFn::custom(format!("s^{p}"), vec![], move |s: f64| s.powf(p))
                }
            };
            StripCase { ell, q, deficit, f }
        })
        .collect()
}

/// Random square matrices with entries in `[-2, 2]`, rejecting nearly
/// singular draws (scaled determinant below 0.05).
pub fn invertible_matrices(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 53);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a: Vec<f64> = (0..d * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let m = nalgebra::DMatrix::from_row_slice(d, d, &a);
        let scale = a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if (m.determinant() / scale.powi(d as i32)).abs() > 0.05 {
            out.push(a);
        }
    }
    out
}

/// A uniformly random unit vector in `R^d`.
pub fn random_unit(seed: u64, d: usize) -> Vec<f64> {
    unit_vector(&mut stream_rng(seed, 54), d)
}
