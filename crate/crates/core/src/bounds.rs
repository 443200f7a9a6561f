//! Evaluators for the quantitative inequalities behind the dimension-free
//! gap: the slicing bound near a half-space, the strip bound on hyperplanes,
//! and the pointwise Jensen and Cauchy–Schwarz steps.
//!
//! Every check returns a [`BoundReport`] whose margin is nonnegative when the
//! inequality holds.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::gaussian::{gaussian_profile, std_normal_cdf, std_normal_interval, std_normal_pdf, std_normal_quantile};
use crate::quad::integrate;
use crate::transport::{HalfspaceSpec, SurfaceSample};
use crate::{BoundReport, Error, Result};

/// Description of `F` as a modification of the half-space `H = {ν·x < offset}`.
///
/// Write `x = p + sν` with `p ∈ ∂H`, so `s` is the signed distance to `∂H`
/// (negative inside `H`), and let `u` be the coordinate of `p` along a fixed
/// unit direction inside `∂H`. The breakpoints split `∂H` into pieces
/// `u_k < u < u_{k+1}`; above piece `k` the slice of `F` is
/// `({s < offsets[k]} ∪ added) \ carved`. Every slice is then a finite union
/// of intervals, so both sides of the slicing bound are computable exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Perturbation {
    pub breakpoints: Vec<f64>,
    /// One graph offset per piece (`breakpoints.len() + 1` values).
    pub offsets: Vec<f64>,
    /// Normal slabs `{a < s < b}` added to every slice.
    #[serde(default)]
    pub added: Vec<(f64, f64)>,
    /// Normal slabs `{a < s < b}` removed from every slice.
    #[serde(default)]
    pub carved: Vec<(f64, f64)>,
}

impl Perturbation {
    /// `F = H`.
    pub fn none() -> Self {
        Self { breakpoints: vec![], offsets: vec![0.0], added: vec![], carved: vec![] }
    }

    /// `F = H` translated by `shift` along the normal.
    pub fn shift(shift: f64) -> Self {
        Self { breakpoints: vec![], offsets: vec![shift], added: vec![], carved: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingConfig {
    pub halfspace: HalfspaceSpec,
    pub r: f64,
    pub perturbation: Perturbation,
}

type Intervals = Vec<(f64, f64)>;

fn normalise(mut iv: Intervals) -> Intervals {
    iv.retain(|(a, b)| a < b);
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Intervals = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn subtract(iv: &Intervals, cut: (f64, f64)) -> Intervals {
    let mut out = Vec::with_capacity(iv.len() + 1);
    for &(a, b) in iv {
        if cut.1 <= a || cut.0 >= b || cut.0 >= cut.1 {
            out.push((a, b));
            continue;
        }
        if a < cut.0 {
            out.push((a, cut.0));
        }
        if cut.1 < b {
            out.push((cut.1, b));
        }
    }
    out
}

fn intersect(iv: &Intervals, window: (f64, f64)) -> Intervals {
    iv.iter().map(|&(a, b)| (a.max(window.0), b.min(window.1))).filter(|(a, b)| a < b).collect()
}

impl SlicingConfig {
    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::domain(format!("strip half-width must be positive, got {}", self.r)));
        }
        let p = &self.perturbation;
        if p.offsets.len() != p.breakpoints.len() + 1 {
            return Err(Error::precondition("need exactly one graph offset per piece"));
        }
        if !p.breakpoints.is_empty() && self.halfspace.dim() < 2 {
            return Err(Error::unsupported("a one-dimensional half-space has no room for graph pieces"));
        }
        if p.breakpoints.windows(2).any(|w| !(w[0] < w[1])) || p.breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::precondition("breakpoints must be finite and strictly increasing"));
        }
        let finite = |v: &f64| v.is_finite();
        if !p.offsets.iter().all(finite) || !p.added.iter().chain(&p.carved).all(|(a, b)| finite(a) && finite(b)) {
            return Err(Error::unsupported("perturbation values must be finite"));
        }
        Ok(())
    }

    /// The slice of `F` above piece `k`, as disjoint sorted intervals in `s`.
    fn slice(&self, k: usize) -> Intervals {
        let p = &self.perturbation;
        let mut iv: Intervals = vec![(f64::NEG_INFINITY, p.offsets[k])];
        iv.extend(p.added.iter().copied());
        let mut iv = normalise(iv);
        for &c in &p.carved {
            iv = subtract(&iv, c);
        }
        normalise(iv)
    }
}

/// Evaluates both sides of the slicing bound
/// `H^{d−1}_γ(π_{∂H}(∂*F ∩ {dist(·,∂H) < r})) ≥ φ(ℓ) − (φ(ℓ)/φ(ℓ+r))·γ_d(F△H)/r`.
pub fn slicing_bound(cfg: &SlicingConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let offset = cfg.halfspace.offset;
    let ell = cfg.halfspace.distance();
    let r = cfg.r;
    let cuts = &cfg.perturbation.breakpoints;
    let mut projected = 0.0;
    let mut sym_diff = 0.0;
    for k in 0..=cuts.len() {
        let lo = if k == 0 { f64::NEG_INFINITY } else { cuts[k - 1] };
        let hi = if k == cuts.len() { f64::INFINITY } else { cuts[k] };
        let weight = std_normal_interval(lo, hi);
        let slice = cfg.slice(k);
        let boundary_in_strip = slice.iter().flat_map(|&(a, b)| [a, b]).any(|e| e.is_finite() && e > -r && e < r);
        if boundary_in_strip {
            projected += weight;
        }
        let outside = intersect(&slice, (0.0, f64::INFINITY));
        let missing = slice.iter().fold(vec![(f64::NEG_INFINITY, 0.0)], |acc, &c| subtract(&acc, c));
        let mass: f64 = outside.iter().chain(&missing).map(|&(a, b)| std_normal_interval(offset + a, offset + b)).sum();
        sym_diff += weight * mass;
    }
    let phi = std_normal_pdf(ell);
    let lhs = phi * projected;
    let rhs = phi - phi / std_normal_pdf(ell + r) * sym_diff / r;
    Ok(BoundReport::at_least(
        lhs,
        rhs,
        json!({ "check": "slicing", "ell": ell, "r": r, "sym_diff": sym_diff, "slicing": cfg }),
    ))
}

fn check_ell(ell: f64) -> Result<()> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::domain(format!("distance must be positive, got {ell}")));
    }
    Ok(())
}

fn check_tilt(q: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("tilt must lie in [-1, 1], got {q}")));
    }
    Ok(())
}

/// Gaussian weight of `Σ ∩ {|x_i| < ℓ/2}` for a hyperplane `Σ` at distance `ℓ`
/// whose unit normal has `i`-th component `q`.
pub fn strip_mass(ell: f64, q: f64) -> Result<f64> {
    check_ell(ell)?;
    check_tilt(q)?;
    let s = (1.0 - q * q).sqrt();
    if s == 0.0 {
        return Ok(0.0);
    }
    let a = (-0.5 * ell - q * ell) / s;
    let b = (0.5 * ell - q * ell) / s;
    Ok(std_normal_pdf(ell) * std_normal_interval(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripConstant {
    /// `φ(ℓ) − max_q strip_mass(ℓ, q)` at the refined maximiser.
    pub value: f64,
    pub maximizer: f64,
    /// `φ(ℓ)` minus the best grid value; never below `value`.
    pub grid_value: f64,
}

/// The constant `c(ℓ) > 0` for which `Σ ∩ {|x_i| < ℓ/2}` has Gaussian weight
/// at most `φ(ℓ) − c(ℓ)`, found by a 2048-point grid search over the tilt
/// followed by golden-section refinement to `1e−10`.
pub fn strip_constant(ell: f64) -> Result<StripConstant> {
    check_ell(ell)?;
    let points = 2048;
    let mass = |q: f64| strip_mass(ell, q.clamp(-1.0, 1.0)).expect("checked arguments");
    let step = 2.0 / (points - 1) as f64;
    let (best_i, grid_best) = (0..points)
        .map(|i| (i, mass(-1.0 + i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let centre = -1.0 + best_i as f64 * step;
    let (mut a, mut b) = ((centre - step).max(-1.0), (centre + step).min(1.0));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (mass(c), mass(d));
    while b - a > 1e-10 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = mass(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = mass(d);
        }
    }
    let mut maximizer = 0.5 * (a + b);
    let mut best = mass(maximizer);
    if grid_best > best {
        maximizer = centre;
        best = grid_best;
    }
    let phi = std_normal_pdf(ell);
    Ok(StripConstant { value: phi - best, maximizer, grid_value: phi - grid_best })
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A nonnegative, nondecreasing test function on `[0, ∞)` with optional
/// points of nonsmoothness (used to split quadrature).
pub struct MonotoneFn {
    f: Box<ScalarFn>,
    breaks: Vec<f64>,
    label: String,
}

impl fmt::Debug for MonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFn").field("label", &self.label).field("breaks", &self.breaks).finish()
    }
}

impl MonotoneFn {
    pub fn custom(label: impl Into<String>, breaks: Vec<f64>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Box::new(f), breaks, label: label.into() }
    }

    pub fn constant(c: f64) -> Self {
        Self::custom(format!("constant({c})"), vec![], move |_| c)
    }

    /// `e^{s²/2} − 1`.
    pub fn gaussian_growth() -> Self {
        Self::custom("exp(s^2/2)-1", vec![], |s| (0.5 * s * s).exp_m1())
    }

    /// `Σ_j a_j·1[s ≥ b_j]·e^{c_j (s − b_j)}` for terms `(a_j, b_j, c_j)` with
    /// `a_j, c_j ≥ 0`.
    pub fn piecewise_exp(terms: Vec<(f64, f64, f64)>) -> Result<Self> {
        if terms.iter().any(|&(a, b, c)| !(a >= 0.0 && c >= 0.0 && b.is_finite() && a.is_finite() && c.is_finite())) {
            return Err(Error::domain("piecewise exponential terms need a, c >= 0 and finite values"));
        }
        let breaks = terms.iter().map(|t| t.1).collect();
        let label = format!("piecewise_exp({terms:?})");
        Ok(Self::custom(label, breaks, move |s| {
            terms.iter().filter(|t| s >= t.1).map(|&(a, b, c)| a * (c * (s - b)).exp()).sum()
        }))
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Samples `[0, 16]` (and the breakpoints) to confirm `f ≥ 0` and that
    /// `f` never decreases.
    pub fn check(&self) -> Result<()> {
        let mut samples: Vec<f64> = (0..=4096).map(|i| i as f64 * 16.0 / 4096.0).collect();
        for &b in &self.breaks {
            if b >= 0.0 {
                samples.extend([b, (b - 1e-9).max(0.0), b + 1e-9]);
            }
        }
        samples.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for s in samples {
            let v = self.eval(s);
            if !(v >= 0.0) {
                return Err(Error::precondition(format!("{} is negative or undefined at {s}", self.label)));
            }
            if v < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::precondition(format!("{} decreases near {s}", self.label)));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Half-width of the integration window in the slice coordinate. Dropping
/// the rest of a nonnegative integrand can only lower the left side, so the
/// reported `lhs` is a valid lower bound even when the full integral diverges.
const STRIP_WINDOW: f64 = 8.0;

/// Evaluates `∫_V f(|x_i|) dH^{d−1}_γ ≥ (c(ℓ) − H^{d−1}_γ(Σ \ V))·f(ℓ/2)`.
///
/// `Σ` is a hyperplane at distance `ℓ` whose normal has `i`-th component `q`,
/// so `x_i = qℓ + √(1−q²)·t` with `t` standard normal under the normalised
/// Gaussian weight of `Σ`. `V` removes weight `deficit` where `|x_i|` is
/// largest, which is where a nondecreasing `f` hurts the left side most.
pub fn strip_bound_check(ell: f64, q: f64, deficit: f64, f: &MonotoneFn) -> Result<BoundReport> {
    check_ell(ell)?;
    check_tilt(q)?;
    if !(deficit >= 0.0 && deficit.is_finite()) {
        return Err(Error::domain(format!("removed weight must be nonnegative, got {deficit}")));
    }
    f.check()?;
    let phi = std_normal_pdf(ell);
    let c = strip_constant(ell)?;
    let s = (1.0 - q * q).sqrt();
    let centre = q * ell;
    let kept = 1.0 - deficit / phi;
    let (lhs, cutoff) = if kept <= 0.0 {
        (0.0, 0.0)
    } else if s == 0.0 {
        (phi * kept * f.eval(ell), ell)
    } else {
        // Largest |x_i| kept: P(|centre + s t| > y) = deficit/φ(ℓ).
        let tail = |y: f64| 1.0 - std_normal_interval((-y - centre) / s, (y - centre) / s);
        let target = deficit / phi;
        let mut hi = centre.abs() + 40.0 * s;
        if target > 0.0 {
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if tail(mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let t_lo = ((-hi - centre) / s).max(-STRIP_WINDOW);
        let t_hi = ((hi - centre) / s).min(STRIP_WINDOW);
        let mut breaks = vec![-centre / s];
        for &b in &f.breaks {
            breaks.extend([(b - centre) / s, (-b - centre) / s]);
        }
        let integrand = |t: f64| f.eval((centre + s * t).abs()) * std_normal_pdf(t);
        let scale = f.eval(hi.min(centre.abs() + STRIP_WINDOW * s)).max(1.0);
        (phi * integrate(&integrand, t_lo, t_hi, &breaks, 1e-13 * scale), hi)
    };
    let rhs = (c.value - deficit) * f.eval(0.5 * ell);
    Ok(BoundReport::at_least(
        lhs,
        rhs,
        json!({
            "check": "strip",
            "ell": ell,
            "q": q,
            "deficit": deficit,
            "f": f.label(),
            "strip_constant": c.value,
            "kept_cutoff": cutoff,
            "window": STRIP_WINDOW,
        }),
    ))
}

/// `L_κ(s)`: shrinks `s` towards zero by `κ`, with a dead zone `|s| ≤ κ`.
pub fn soft_threshold(s: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::domain(format!("threshold must be nonnegative, got {kappa}")));
    }
    Ok(if s > kappa {
        s - kappa
    } else if s < -kappa {
        s + kappa
    } else {
        0.0
    })
}

/// `√(Σ νᵢ² e^{xᵢ²}) − 1 − Σ νᵢ² (e^{xᵢ²/2} − 1)`, the slack of Jensen's
/// inequality for `√· − 1` with weights `νᵢ²`.
///
/// With `aᵢ = e^{xᵢ²/2} − 1`, `T = Σ wᵢaᵢ` and `D = Σ wᵢ(aᵢ − T)²` the gap
/// equals `D/(√((1+T)² + D) + 1 + T)`, which is evaluated without
/// cancellation. For large `|x|` everything is rescaled by `e^{m/2}`,
/// `m = max xᵢ²`, and the scale is restored in the log domain (the gap may
/// then overflow to `+∞`, never to a negative value).
pub fn jensen_gap(nu: &[f64], x: &[f64]) -> Result<f64> {
    if nu.len() != x.len() || nu.is_empty() {
        return Err(Error::domain("normal and point must have the same positive length"));
    }
    let n2: f64 = nu.iter().map(|v| v * v).sum();
    if !((n2.sqrt() - 1.0).abs() <= 1e-12) {
        return Err(Error::domain(format!("normal must be a unit vector, |nu| = {}", n2.sqrt())));
    }
    let w: Vec<f64> = nu.iter().map(|n| n * n / n2).collect();
    let max_sq = x.iter().map(|t| t * t).fold(0.0, f64::max);
    let gap_of = |a: &[f64], one: f64| {
        let t: f64 = w.iter().zip(a).map(|(w, a)| w * a).sum();
        let d: f64 = w.iter().zip(a).map(|(w, a)| w * (a - t) * (a - t)).sum();
        let big_a = one + t;
        d / ((big_a * big_a + d).sqrt() + big_a)
    };
    if max_sq <= 700.0 {
        let a: Vec<f64> = x.iter().map(|t| (0.5 * t * t).exp_m1()).collect();
        return Ok(gap_of(&a, 1.0));
    }
    let half = 0.5 * max_sq;
    let one = (-half).exp();
    let a: Vec<f64> = x.iter().map(|t| (0.5 * t * t - half).exp() - one).collect();
    let scaled = gap_of(&a, one);
    Ok(if scaled == 0.0 { 0.0 } else { (half + scaled.ln()).exp() })
}

/// `Σ|uᵢ² − vᵢ²| ≤ |u − v|·|u + v|`.
pub fn cs_pointwise(u: &[f64], v: &[f64]) -> Result<BoundReport> {
    if u.len() != v.len() {
        return Err(Error::domain(format!("vectors have lengths {} and {}", u.len(), v.len())));
    }
    let lhs: f64 = u.iter().zip(v).map(|(a, b)| ((a - b) * (a + b)).abs()).sum();
    let minus: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    let plus: f64 = u.iter().zip(v).map(|(a, b)| (a + b) * (a + b)).sum();
    let rhs = (minus * plus).sqrt();
    Ok(BoundReport::at_most(lhs, rhs, json!({ "check": "cauchy_schwarz", "len": u.len() })))
}

/// `min{1, (|Φ⁻¹(λ)|/4)⁴}`, with the cap used at `λ ∈ {0, 1}`.
pub fn delta_threshold(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("volume must lie in [0, 1], got {lambda}")));
    }
    if lambda == 0.0 || lambda == 1.0 {
        return Ok(1.0);
    }
    Ok((std_normal_quantile(lambda)?.abs() / 4.0).powi(4).min(1.0))
}

/// A set whose Gaussian perimeter is compared with `I_γ` of its volume.
#[derive(Debug, Clone, Copy)]
pub enum IsoperimetricInput<'a> {
    Halfspace(&'a HalfspaceSpec),
    /// A sampled boundary; the volume is supplied separately.
    Surface(&'a SurfaceSample),
}

/// `Per_γ(E) − I_γ(λ)`, nonnegative by the Gaussian isoperimetric inequality
/// and zero exactly for half-spaces.
pub fn gaussian_isoperimetry_margin(input: IsoperimetricInput<'_>, lambda: f64) -> Result<BoundReport> {
    let profile = gaussian_profile(lambda)?;
    let (perimeter, kind) = match input {
        IsoperimetricInput::Halfspace(h) => {
            let measure = std_normal_cdf(h.offset);
            if (measure - lambda).abs() > 1e-9 {
                return Err(Error::precondition(format!("half-space has Gaussian measure {measure}, not {lambda}")));
            }
            (h.gauss_perimeter(), "halfspace")
        }
        IsoperimetricInput::Surface(s) => (s.gauss_perimeter(), "surface"),
    };
    Ok(BoundReport::at_least(
        perimeter,
        profile,
        json!({ "check": "gaussian_isoperimetry", "input": kind, "lambda": lambda }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::CandidateSpec;
    use crate::transport::transported_candidate_surface;

    fn axis_half(offset: f64) -> HalfspaceSpec {
        HalfspaceSpec::axis(3, 0, offset).unwrap()
    }

    #[test]
    fn slicing_examples() {
        let cfg = SlicingConfig { halfspace: axis_half(0.7), r: 0.3, perturbation: Perturbation::none() };
        let rep = slicing_bound(&cfg).unwrap();
        assert_eq!(rep.lhs, std_normal_pdf(0.7));
        assert_eq!(rep.rhs, std_normal_pdf(0.7));
        assert_eq!(rep.margin, 0.0);

        let h = HalfspaceSpec::new(vec![1.0], 0.5).unwrap();
        let cfg = SlicingConfig { halfspace: h, r: 0.25, perturbation: Perturbation::shift(0.125) };
        let rep = slicing_bound(&cfg).unwrap();
        let expected = std_normal_pdf(0.5)
            - std_normal_pdf(0.5) / std_normal_pdf(0.75) * (std_normal_cdf(0.625) - std_normal_cdf(0.5)) / 0.25;
        assert!((rep.lhs - std_normal_pdf(0.5)).abs() < 1e-15);
        assert!((rep.rhs - expected).abs() < 1e-14);
        assert!(rep.margin > 0.0);

        let cfg = SlicingConfig { halfspace: axis_half(0.5), r: 0.2, perturbation: Perturbation::shift(0.4) };
        let rep = slicing_bound(&cfg).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.rhs <= 0.0);
    }

    #[test]
    fn slicing_pieces_and_carving() {
        let p = Perturbation { breakpoints: vec![0.0], offsets: vec![0.05, 0.9], added: vec![], carved: vec![] };
        let cfg = SlicingConfig { halfspace: axis_half(-0.4), r: 0.3, perturbation: p };
        let rep = slicing_bound(&cfg).unwrap();
        // Only the piece u < 0 (half the weight) keeps its boundary in the strip.
        assert!((rep.lhs - 0.5 * std_normal_pdf(0.4)).abs() < 1e-15);
        let expected_diff =
            0.5 * (std_normal_cdf(-0.35) - std_normal_cdf(-0.4)) + 0.5 * (std_normal_cdf(0.5) - std_normal_cdf(-0.4));
        assert!((rep.config["sym_diff"].as_f64().unwrap() - expected_diff).abs() < 1e-15);
        assert!(rep.margin >= 0.0);

        // Carving a slab far below the strip adds boundary outside it only.
        let p = Perturbation { carved: vec![(-3.0, -2.0)], ..Perturbation::shift(0.5) };
        let rep = slicing_bound(&SlicingConfig { halfspace: axis_half(0.2), r: 0.25, perturbation: p }).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.margin >= 0.0);

        let p = Perturbation { breakpoints: vec![0.0], offsets: vec![0.0, 0.0], ..Perturbation::none() };
        let one_d = HalfspaceSpec::new(vec![1.0], 0.0).unwrap();
        assert!(matches!(
            slicing_bound(&SlicingConfig { halfspace: one_d, r: 0.1, perturbation: p }),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn strip_mass_examples() {
        let v = strip_mass(1.0, 0.0).unwrap();
        let closed = std_normal_pdf(1.0) * (2.0 * std_normal_cdf(0.5) - 1.0);
        assert!((v - closed).abs() < 1e-16);
        assert!((v - 0.092_656_6).abs() < 1e-7);
        assert_eq!(strip_mass(0.7, 1.0).unwrap(), 0.0);
        assert_eq!(strip_mass(0.7, -1.0).unwrap(), 0.0);
        assert!(strip_mass(1.0, 0.9).unwrap() < 0.5 * std_normal_pdf(1.0));
        assert!(strip_mass(0.0, 0.1).is_err());
    }

    #[test]
    fn strip_constant_matches_fine_grid() {
        let c = strip_constant(1.0).unwrap();
        let grid_max = (0..=10_000).map(|i| strip_mass(1.0, -1.0 + i as f64 * 2e-4).unwrap()).fold(0.0, f64::max);
        assert!(c.value > 0.0);
        assert!(c.value <= std_normal_pdf(1.0) - grid_max + 1e-12);
        assert!(c.value <= c.grid_value);
        assert!((c.value - (std_normal_pdf(1.0) - strip_mass(1.0, c.maximizer).unwrap())).abs() < 1e-15);
        for ell in [0.5, 1.0, 2.0] {
            let c = strip_constant(ell).unwrap();
            assert!(c.value > 0.0 && c.value < std_normal_pdf(ell));
        }
    }

    #[test]
    fn strip_check_examples() {
        let c = strip_constant(1.0).unwrap().value;
        let rep = strip_bound_check(1.0, 0.3, 0.0, &MonotoneFn::constant(1.0)).unwrap();
        assert!((rep.lhs - std_normal_pdf(1.0)).abs() < 1e-12);
        assert!((rep.rhs - c).abs() < 1e-15);

        let rep = strip_bound_check(1.0, 0.0, 0.0, &MonotoneFn::gaussian_growth()).unwrap();
        // Here f(|t|)φ(t) = 1/√(2π) − φ(t), integrated over the window |t| ≤ 8.
        let oracle = std_normal_pdf(1.0) * (16.0 * crate::INV_SQRT_2PI - std_normal_interval(-8.0, 8.0));
        assert!((rep.lhs - oracle).abs() < 1e-10, "{} vs {oracle}", rep.lhs);
        assert!(rep.margin > 0.0);

        let rep = strip_bound_check(1.0, 0.4, c + 0.01, &MonotoneFn::gaussian_growth()).unwrap();
        assert!(rep.rhs <= 0.0 && rep.margin >= 0.0);

        let decreasing = MonotoneFn::custom("1/(1+s)", vec![], |s| 1.0 / (1.0 + s));
        assert!(matches!(strip_bound_check(1.0, 0.0, 0.0, &decreasing), Err(Error::Precondition(_))));
    }

    #[test]
    fn strip_check_removes_largest_values() {
        // Removing weight where |x_i| is largest leaves exactly the kept mass.
        let phi = std_normal_pdf(0.8);
        let rep = strip_bound_check(0.8, 0.2, 0.25 * phi, &MonotoneFn::constant(1.0)).unwrap();
        assert!((rep.lhs - 0.75 * phi).abs() < 1e-9);
        let rep = strip_bound_check(0.8, 1.0, 0.25 * phi, &MonotoneFn::gaussian_growth()).unwrap();
        assert!((rep.lhs - 0.75 * phi * 0.32f64.exp_m1()).abs() < 1e-15);
        let rep = strip_bound_check(0.8, 0.5, 2.0 * phi, &MonotoneFn::constant(1.0)).unwrap();
        assert_eq!(rep.lhs, 0.0);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(0.5, 1.0).unwrap(), 0.0);
        assert_eq!(soft_threshold(2.0, 0.5).unwrap(), 1.5);
        assert_eq!(soft_threshold(-2.0, 0.5).unwrap(), -1.5);
        assert_eq!(soft_threshold(-0.3, 0.0).unwrap(), -0.3);
        assert!(soft_threshold(1.0, -0.1).is_err());
    }

    #[test]
    fn jensen_examples() {
        assert!(jensen_gap(&[1.0, 0.0], &[3.0, -1.0]).unwrap().abs() < 1e-15);
        assert_eq!(jensen_gap(&[0.6, 0.8], &[0.0, 0.0]).unwrap(), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let direct = (0.5 * 4f64.exp() + 0.5).sqrt() - 1.0 - 0.5 * (2f64.exp() - 1.0);
        let gap = jensen_gap(&[s, s], &[2.0, 0.0]).unwrap();
        assert!(gap > 0.0 && (gap - direct).abs() < 1e-12);
        assert!(jensen_gap(&[s, s], &[30.0, 1.0]).unwrap() > 0.0);
        // Rescaled branch: the gap is e^{450}(1/√2 − 1/2) up to terms of relative size e^{-450}.
        let big = jensen_gap(&[s, s], &[30.0, 0.0]).unwrap();
        assert!((big / (450f64.exp() * (s - 0.5)) - 1.0).abs() < 1e-12);
        assert_eq!(jensen_gap(&[s, s], &[40.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(jensen_gap(&[1.0, 0.0], &[40.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn cs_examples() {
        assert_eq!(cs_pointwise(&[1.0, 2.0], &[1.0, 2.0]).unwrap().margin, 0.0);
        let r = cs_pointwise(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!((r.lhs, r.rhs), (2.0, 2.0));
        assert!(r.margin.abs() < 1e-15);
        assert!(cs_pointwise(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_threshold(0.5).unwrap(), 0.0);
        let q: f64 = 0.674_489_750_196_081_7;
        assert!((delta_threshold(0.25).unwrap() - (q / 4.0).powi(4)).abs() < 1e-17);
        assert!((delta_threshold(0.25).unwrap() - 8.0847e-4).abs() < 1e-8);
        assert_eq!(delta_threshold(1e-9).unwrap(), 1.0);
        assert_eq!(delta_threshold(0.0).unwrap(), 1.0);
        // 1 − λ is exact for λ ≥ ½.
        assert_eq!(delta_threshold(0.7).unwrap(), delta_threshold(1.0 - 0.7).unwrap());
    }

    #[test]
    fn isoperimetry_examples() {
        let h = HalfspaceSpec::new(vec![0.6, 0.8], 0.4).unwrap();
        let rep = gaussian_isoperimetry_margin(IsoperimetricInput::Halfspace(&h), std_normal_cdf(0.4)).unwrap();
        assert!(rep.margin.abs() < 1e-12);
        assert!(matches!(
            gaussian_isoperimetry_margin(IsoperimetricInput::Halfspace(&h), 0.5),
            Err(Error::Precondition(_))
        ));
        let ball = transported_candidate_surface(&CandidateSpec::vertex_ball(2, 0.1), 4000).unwrap();
        let rep = gaussian_isoperimetry_margin(IsoperimetricInput::Surface(&ball), 0.1).unwrap();
        assert!(rep.margin > 1e-3);
    }
}
