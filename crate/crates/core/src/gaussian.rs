//! Gaussian primitives.
//!
//! `Φ` is evaluated through the complementary error function
//! (`Φ(t) = ½·erfc(−t/√2)`), which keeps full relative accuracy in the lower
//! tail. `Φ⁻¹` brackets the root by bisection down to a width of `1e−3` and
//! then polishes with Newton steps; upper-tail arguments are reflected into the
//! lower tail so that `Φ⁻¹(1−p) = −Φ⁻¹(p)` holds exactly for `p > ½`.
//!
//! Random numbers come from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded with
//! `SeedableRng::seed_from_u64`. Independent streams for the same seed are
//! obtained with [`stream_rng`], which selects the ChaCha stream id, so runs
//! are reproducible across machines and can be split across workers without
//! sharing state. Normal deviates use the ziggurat sampler of `rand_distr`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, INV_SQRT_2PI};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Standard normal density `φ(t) = (2π)^{−1/2}·exp(−t²/2)`.
pub fn std_normal_pdf(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}

/// Standard normal distribution function `Φ(t)`; `Φ(±∞)` are `1` and `0`.
pub fn std_normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(t)` without cancellation.
pub fn std_normal_sf(t: f64) -> f64 {
    std_normal_cdf(-t)
}

/// Gaussian mass of the interval `(a, b)`, computed on the tail where the
/// difference does not cancel.
pub fn std_normal_interval(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a >= 0.0 {
        std_normal_sf(a) - std_normal_sf(b)
    } else {
        std_normal_cdf(b) - std_normal_cdf(a)
    }
}

/// Inverse of [`std_normal_cdf`] on the open interval `(0, 1)`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile requires 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        // 1 − p is exact for p in [½, 1].
        Ok(-lower_tail_quantile(1.0 - p))
    } else {
        Ok(lower_tail_quantile(p))
    }
}

fn lower_tail_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    // Φ(−39) underflows to zero, so the root is bracketed for every positive p.
    let (mut lo, mut hi) = (-39.0_f64, 0.0_f64);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if std_normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..60 {
        let dens = std_normal_pdf(x);
        if dens == 0.0 {
            break;
        }
        let step = (std_normal_cdf(x) - p) / dens;
        let next = (x - step).clamp(lo - 1.0, hi + 1.0);
        let moved = (next - x).abs();
        x = next;
        if moved <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Gaussian isoperimetric profile `I_γ(λ) = φ(Φ⁻¹(λ))`, with `I_γ(0) = I_γ(1) = 0`.
pub fn gaussian_profile(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("Gaussian profile requires 0 <= lambda <= 1, got {lambda}")));
    }
    if lambda == 0.0 || lambda == 1.0 {
        return Ok(0.0);
    }
    Ok(std_normal_pdf(std_normal_quantile(lambda)?))
}

/// `d`-dimensional standard Gaussian density `(2π)^{−d/2}·exp(−|x|²/2)`.
pub fn gaussian_density_d(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::domain("Gaussian density of an empty point"));
    }
    Ok(log_gaussian_density(x).exp())
}

pub(crate) fn log_gaussian_density(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    -0.5 * r2 - 0.5 * x.len() as f64 * LN_2PI
}

/// ChaCha8 generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fills `out` with independent standard normal draws.
pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// `n` independent standard Gaussian points in `R^d`, deterministic in `seed`.
pub fn sample_gaussian(d: usize, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if d == 0 || n == 0 {
        return Err(Error::domain("sample_gaussian needs d >= 1 and n >= 1"));
    }
    let mut rng = stream_rng(seed, 0);
    Ok((0..n)
        .map(|_| {
            let mut p = vec![0.0; d];
            fill_standard_normal(&mut rng, &mut p);
            p
        })
        .collect())
}
