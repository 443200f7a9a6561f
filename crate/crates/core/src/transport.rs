//! The coordinatewise transport `Φ_d(x) = (Φ(x₁), …, Φ(x_d))` between
//! Gaussian space and the open cube, and the boundary identities it induces.
//!
//! For a hypersurface `∂F ⊂ R^d` with unit normal `ν`, the image `Φ_d(∂F)`
//! has area element `φ_d(x)·√(2π)·√(Σ νᵢ² e^{xᵢ²})` with respect to `dH^{d−1}`
//! on `∂F`. Dividing by `√(2π)` splits the cube perimeter into the Gaussian
//! perimeter of `F` plus a nonnegative penalty, which is what
//! [`penalized_functional`] evaluates.
//!
//! All surface integrals are taken on the Gaussian side: surfaces are sampled
//! as weighted point clouds on `∂F` ([`SurfaceSample`]) and weighted by `φ_d`,
//! which keeps the integrands bounded near the faces of the cube.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::candidates::{CandidateSpec, Family};
use crate::gaussian::{
    fill_standard_normal, log_gaussian_density, std_normal_cdf, std_normal_pdf, std_normal_quantile, stream_rng,
};
use crate::report::BoundReport;
use crate::{Error, Result, INV_SQRT_2PI, MAX_DIMENSION, SQRT_2PI};

/// Tolerance on `|ν| = 1` for user-supplied normals.
const UNIT_TOL: f64 = 1e-12;

/// Default half-width of hyperplane quadrature, in standard deviations.
/// The neglected Gaussian mass per truncated direction is below `e^{−32}`.
pub const DEFAULT_EXTENT: f64 = 8.0;

/// Largest dimension for tensor-product hyperplane quadrature.
pub const MAX_TENSOR_DIMENSION: usize = 6;

const MAX_SURFACE_NODES: usize = 1 << 26;

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::domain(format!("dimension must be in 1..={MAX_DIMENSION}, got {d}")));
    }
    Ok(())
}

fn check_unit(nu: &[f64]) -> Result<()> {
    let n2: f64 = nu.iter().map(|v| v * v).sum();
    if !((n2.sqrt() - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::domain(format!("normal must be a unit vector, |nu| = {}", n2.sqrt())));
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `Φ_d(x)`: maps a point of `R^d` into the open cube.
pub fn to_cube(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&t| std_normal_cdf(t)).collect()
}

/// `Φ_d⁻¹(y)`; every coordinate must lie strictly inside `(0, 1)`.
pub fn to_gauss(y: &[f64]) -> Result<Vec<f64>> {
    y.iter()
        .map(|&c| {
            if c > 0.0 && c < 1.0 {
                std_normal_quantile(c)
            } else {
                Err(Error::domain(format!("cube coordinate {c} not in (0, 1)")))
            }
        })
        .collect()
}

/// Jacobian determinant of a linear map `A` (row-major `d×d`) restricted to
/// the hyperplane `ν^⊥`: `|det A|·|(Aᵀ)⁻¹ν|`.
pub fn restriction_jacobian(a: &[f64], nu: &[f64]) -> Result<f64> {
    let d = nu.len();
    check_dim(d)?;
    check_unit(nu)?;
    if a.len() != d * d {
        return Err(Error::domain(format!("matrix has {} entries, expected {}", a.len(), d * d)));
    }
    let m = DMatrix::from_row_slice(d, d, a);
    let scale = m.amax();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Singular { scaled_det: 0.0 });
    }
    let scaled_det = (&m / scale).determinant();
    if scaled_det.abs() <= 1e-12 {
        return Err(Error::Singular { scaled_det });
    }
    let w = m.transpose().lu().solve(&DVector::from_column_slice(nu)).ok_or(Error::Singular { scaled_det })?;
    Ok(m.determinant().abs() * w.norm())
}

/// Orthonormal basis of `ν^⊥` by Gram–Schmidt on the coordinate axes, taken in
/// order of increasing `|νᵢ|` (ties by index).
pub fn orthonormal_complement(nu: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = nu.len();
    check_dim(d)?;
    check_unit(nu)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| nu[i].abs().total_cmp(&nu[j].abs()).then(i.cmp(&j)));
    let mut basis: Vec<Vec<f64>> = vec![nu.to_vec()];
    for i in order {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis.remove(0);
    Ok(basis)
}

/// Monte Carlo estimate of the area of `A(Q)`, where `Q` is the unit cube of
/// `ν^⊥` spanned by [`orthonormal_complement`].
///
/// Uniform points of `Q` are pushed through `A`; the covariance `Σ` of the
/// images equals `W·Wᵀ/12` for the edge matrix `W` of the image parallelotope,
/// so the area is `√(12^{d−1}·e_{d−1}(Σ))` where `e_{d−1}` is the sum of the
/// principal `(d−1)`-minors. No inverse of `A` is involved.
pub fn restriction_area_monte_carlo(a: &[f64], nu: &[f64], samples: usize, seed: u64) -> Result<f64> {
    let d = nu.len();
    if d < 2 {
        return Err(Error::domain("the area oracle needs d >= 2"));
    }
    if a.len() != d * d {
        return Err(Error::domain(format!("matrix has {} entries, expected {}", a.len(), d * d)));
    }
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let basis = orthonormal_complement(nu)?;
    let mut rng = stream_rng(seed, 1);
    let mut mean = vec![0.0; d];
    let mut m2 = vec![0.0; d * d];
    let mut p = vec![0.0; d];
    let mut img = vec![0.0; d];
    let mut delta = vec![0.0; d];
    for count in 1..=samples {
        p.iter_mut().for_each(|v| *v = 0.0);
        for b in &basis {
            let u: f64 = rng.random();
            p.iter_mut().zip(b).for_each(|(x, y)| *x += u * y);
        }
        for (r, out) in img.iter_mut().enumerate() {
            *out = (0..d).map(|c| a[r * d + c] * p[c]).sum();
        }
        let k = count as f64;
        for i in 0..d {
            delta[i] = img[i] - mean[i];
            mean[i] += delta[i] / k;
        }
        for i in 0..d {
            let after = img[i] - mean[i];
            for j in 0..d {
                m2[i * d + j] += after * delta[j];
            }
        }
    }
    let cov = DMatrix::from_row_slice(d, d, &m2) / (samples as f64 - 1.0);
    let mut minors = 0.0;
    for skip in 0..d {
        let keep: Vec<usize> = (0..d).filter(|&i| i != skip).collect();
        let sub = DMatrix::from_fn(d - 1, d - 1, |r, c| cov[(keep[r], keep[c])]);
        minors += sub.determinant();
    }
    Ok((12f64.powi(d as i32 - 1) * minors).max(0.0).sqrt())
}

/// Boundary weight `√(2π)·√(Σ νᵢ² e^{xᵢ²})`, at least `√(2π)` with equality
/// exactly when `νᵢxᵢ = 0` for every `i`.
pub fn boundary_weight(x: &[f64], nu: &[f64]) -> Result<f64> {
    if x.len() != nu.len() {
        return Err(Error::domain("point and normal have different lengths"));
    }
    check_unit(nu)?;
    Ok(SQRT_2PI * (0.5 * log_weight_sum(x, nu)).exp())
}

/// `ln Σ νᵢ² e^{xᵢ²}` without overflow.
fn log_weight_sum(x: &[f64], nu: &[f64]) -> f64 {
    let m = x.iter().zip(nu).filter(|(_, n)| **n != 0.0).map(|(t, _)| t * t).fold(0.0_f64, f64::max);
    let s: f64 = x.iter().zip(nu).map(|(t, n)| n * n * (t * t - m).exp()).sum();
    m + s.ln()
}

/// Returns `(φ_d(x), φ_d(x)·(√(Σ νᵢ² e^{xᵢ²}) − 1))`, assuming `|ν| = 1`.
fn density_and_excess(x: &[f64], nu: &[f64]) -> (f64, f64) {
    let log_dens = log_gaussian_density(x);
    let dens = log_dens.exp();
    let max_sq = x.iter().zip(nu).filter(|(_, n)| **n != 0.0).map(|(t, _)| t * t).fold(0.0, f64::max);
    let excess = if max_sq < 600.0 {
        // √S − 1 = (S − 1)/(√S + 1) with S − 1 = Σ νᵢ² (e^{xᵢ²} − 1) ≥ 0.
        let s_minus_1: f64 = x.iter().zip(nu).map(|(t, n)| n * n * (t * t).exp_m1()).sum();
        dens * (s_minus_1 / ((1.0 + s_minus_1).sqrt() + 1.0))
    } else {
        ((log_dens + 0.5 * log_weight_sum(x, nu)).exp() - dens).max(0.0)
    };
    (dens, excess)
}

/// Weighted point cloud on a hypersurface of `R^d`: positions, unit normals
/// and plain (unweighted) area quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    dim: usize,
    points: Vec<f64>,
    normals: Vec<f64>,
    weights: Vec<f64>,
}

impl SurfaceSample {
    /// `points` and `normals` are flat row-major arrays of `d`-vectors.
    pub fn new(dim: usize, points: Vec<f64>, normals: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("surface dimension must be positive"));
        }
        let n = weights.len();
        if points.len() != n * dim || normals.len() != n * dim {
            return Err(Error::precondition("points, normals and weights disagree in length"));
        }
        for k in 0..n {
            check_unit(&normals[k * dim..(k + 1) * dim])?;
            if !(weights[k] > 0.0 && weights[k].is_finite()) {
                return Err(Error::precondition(format!("weight {} at node {k} is not positive", weights[k])));
            }
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("non-finite surface point"));
        }
        Ok(Self { dim, points, normals, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn normal(&self, k: usize) -> &[f64] {
        &self.normals[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Plain area `Σ weights`.
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Gaussian perimeter `Σ w·φ_d(x)`.
    pub fn gauss_perimeter(&self) -> f64 {
        (0..self.len()).map(|k| self.weights[k] * log_gaussian_density(self.point(k)).exp()).sum()
    }

    /// Embeds the surface into `R^{dim + extra}` as `∂F × R^{extra}`. Because
    /// neither the normal nor the integrands depend on the new coordinates, a
    /// single node at the origin with weight `(2π)^{extra/2}` integrates them
    /// exactly against the Gaussian density.
    pub fn lifted(&self, extra: usize) -> Self {
        let dim = self.dim + extra;
        let factor = (2.0 * std::f64::consts::PI).powf(0.5 * extra as f64);
        let mut points = Vec::with_capacity(self.len() * dim);
        let mut normals = Vec::with_capacity(self.len() * dim);
        for k in 0..self.len() {
            points.extend_from_slice(self.point(k));
            points.extend(std::iter::repeat_n(0.0, extra));
            normals.extend_from_slice(self.normal(k));
            normals.extend(std::iter::repeat_n(0.0, extra));
        }
        let weights = self.weights.iter().map(|w| w * factor).collect();
        Self { dim, points, normals, weights }
    }
}

/// Affine half-space `{x : ν·x < offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfspaceSpec {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        check_dim(normal.len())?;
        check_unit(&normal)?;
        if !offset.is_finite() {
            return Err(Error::domain("half-space offset must be finite"));
        }
        Ok(Self { normal, offset })
    }

    /// The coordinate half-space `{x_axis < offset}` in `R^d`.
    pub fn axis(d: usize, axis: usize, offset: f64) -> Result<Self> {
        if axis >= d {
            return Err(Error::domain(format!("axis {axis} out of range for dimension {d}")));
        }
        let mut normal = vec![0.0; d];
        normal[axis] = 1.0;
        Self::new(normal, offset)
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Distance `ℓ` from the origin to the boundary hyperplane.
    pub fn distance(&self) -> f64 {
        self.offset.abs()
    }

    /// `γ_d(H) = Φ(offset)`.
    pub fn gaussian_measure(&self) -> f64 {
        std_normal_cdf(self.offset)
    }

    /// `Per_γ(H) = φ(offset)`.
    pub fn gauss_perimeter(&self) -> f64 {
        std_normal_pdf(self.offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenalizedValue {
    pub gauss_perimeter: f64,
    pub penalty: f64,
    pub total: f64,
}

/// Gaussian perimeter plus the penalty `∫ (√(Σ νᵢ² e^{xᵢ²}) − 1) dH^{d−1}_γ`
/// over a sampled surface. The total equals `Per(Φ_d(F), (0,1)^d)/√(2π)`.
pub fn penalized_functional(surface: &SurfaceSample) -> PenalizedValue {
    let (mut gauss, mut penalty) = (0.0, 0.0);
    for k in 0..surface.len() {
        let (dens, excess) = density_and_excess(surface.point(k), surface.normal(k));
        gauss += surface.weight(k) * dens;
        penalty += surface.weight(k) * excess;
    }
    PenalizedValue { gauss_perimeter: gauss, penalty, total: gauss + penalty }
}

/// Trapezoidal tensor-product nodes on the hyperplane `∂H`, truncated to
/// `|coordinate| ≤ extent` in an orthonormal frame of the hyperplane.
pub fn analytic_halfspace_surface(
    h: &HalfspaceSpec,
    d: usize,
    extent: f64,
    resolution: usize,
) -> Result<SurfaceSample> {
    if h.dim() != d {
        return Err(Error::domain(format!("half-space lives in dimension {}, not {d}", h.dim())));
    }
    if d > MAX_TENSOR_DIMENSION {
        return Err(Error::unsupported(format!(
            "tensor quadrature is limited to d <= {MAX_TENSOR_DIMENSION}; sample the hyperplane by Monte Carlo instead"
        )));
    }
    if resolution < 2 || !(extent > 0.0) {
        return Err(Error::domain("need resolution >= 2 and extent > 0"));
    }
    let free = d - 1;
    let total = (0..free).try_fold(1usize, |acc, _| acc.checked_mul(resolution)).filter(|&t| t <= MAX_SURFACE_NODES);
    let total =
        total.ok_or_else(|| Error::TooLarge { what: "hyperplane quadrature nodes".into(), cap: MAX_SURFACE_NODES })?;
    let frame = orthonormal_complement(&h.normal)?;
    let step = 2.0 * extent / (resolution - 1) as f64;
    let node = |j: usize| -extent + j as f64 * step;
    let weight = |j: usize| if j == 0 || j == resolution - 1 { 0.5 * step } else { step };

    let mut points = Vec::with_capacity(total * d);
    let mut normals = Vec::with_capacity(total * d);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; free];
    for _ in 0..total {
        let mut p: Vec<f64> = h.normal.iter().map(|n| n * h.offset).collect();
        let mut w = 1.0;
        for (axis, &j) in idx.iter().enumerate() {
            let c = node(j);
            p.iter_mut().zip(&frame[axis]).for_each(|(x, b)| *x += c * b);
            w *= weight(j);
        }
        points.extend(p);
        normals.extend_from_slice(&h.normal);
        weights.push(w);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < resolution {
                break;
            }
            *slot = 0;
        }
    }
    SurfaceSample::new(d, points, normals, weights)
}

/// Exact one-node rule for a coordinate hyperplane `{x_axis = offset}`: the
/// integrands are constant on it and its Gaussian mass is `φ(offset)`.
pub fn axis_hyperplane_surface(d: usize, axis: usize, offset: f64) -> Result<SurfaceSample> {
    let h = HalfspaceSpec::axis(d, axis, offset)?;
    let base = SurfaceSample::new(1, vec![offset], vec![1.0], vec![1.0])?;
    let mut s = base.lifted(d - 1);
    // Move the constrained coordinate into place.
    for k in 0..s.len() {
        let row = k * d;
        s.points[row..row + d].rotate_right(axis);
        s.normals[row..row + d].copy_from_slice(&h.normal);
    }
    Ok(s)
}

/// Samples `Φ_d⁻¹` of a parametrised cube surface with a midpoint rule.
///
/// `map(u)` returns the cube point and the cube-side tangent vectors `∂y/∂u_j`
/// for parameters `u ∈ Π (lo_j, hi_j)`. Gaussian-side tangents follow from
/// `∂x_i/∂u_j = (∂y_i/∂u_j)/φ(x_i)`; only one or two parameters are supported.
fn transported_parametric_surface(
    dim: usize,
    ranges: &[(f64, f64)],
    resolution: usize,
    map: impl Fn(&[f64]) -> (Vec<f64>, Vec<Vec<f64>>),
) -> Result<SurfaceSample> {
    let params = ranges.len();
    debug_assert!(params == dim - 1 && (1..=2).contains(&params));
    let steps: Vec<f64> = ranges.iter().map(|(lo, hi)| (hi - lo) / resolution as f64).collect();
    let cell: f64 = steps.iter().product();
    let total = resolution.pow(params as u32);
    let mut points = Vec::with_capacity(total * dim);
    let mut normals = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut u = vec![0.0; params];
    for flat in 0..total {
        let mut rest = flat;
        for j in 0..params {
            u[j] = ranges[j].0 + ((rest % resolution) as f64 + 0.5) * steps[j];
            rest /= resolution;
        }
        let (y, cube_tangents) = map(&u);
        let x = to_gauss(&y)?;
        let dens: Vec<f64> = x.iter().map(|&t| std_normal_pdf(t)).collect();
        let tangents: Vec<Vec<f64>> =
            cube_tangents.iter().map(|t| t.iter().zip(&dens).map(|(a, p)| a / p).collect()).collect();
        let raw_normal = match params {
            1 => vec![-tangents[0][1], tangents[0][0]],
            _ => {
                let (a, b) = (&tangents[0], &tangents[1]);
                vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
            }
        };
        let area = norm(&raw_normal);
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::unsupported("degenerate surface parametrisation"));
        }
        points.extend(x);
        normals.extend(raw_normal.iter().map(|v| v / area));
        weights.push(area * cell);
    }
    SurfaceSample::new(dim, points, normals, weights)
}

/// Gaussian-side boundary of the transported candidate `Φ_d⁻¹(E)`.
///
/// Slabs in any `d ≤ 16` use the exact coordinate-hyperplane rule; vertex
/// balls (`d ≤ 3`) and edge cylinders use `resolution` midpoint nodes per
/// surface parameter; lifts reuse the surface of their base.
pub fn transported_candidate_surface(c: &CandidateSpec, resolution: usize) -> Result<SurfaceSample> {
    c.validate()?;
    let mu = c.family_volume();
    if mu <= 0.0 || mu >= 1.0 {
        return Err(Error::domain("degenerate candidate has no boundary"));
    }
    if resolution == 0 {
        return Err(Error::domain("resolution must be positive"));
    }
    let d = c.dimension;
    let half_pi = std::f64::consts::FRAC_PI_2;
    match c.family {
        Family::AxisSlab => {
            let dir = c.direction.expect("validated");
            let offset = if dir.positive { std_normal_quantile(mu)? } else { std_normal_quantile(1.0 - mu)? };
            axis_hyperplane_surface(d, dir.axis, offset)
        }
        Family::VertexBall => {
            let r = c.radius().expect("ball radius");
            if r > 1.0 + 1e-12 {
                return Err(Error::unsupported("vertex ball is not valid at this volume"));
            }
            match d {
                1 => axis_hyperplane_surface(1, 0, std_normal_quantile(mu)?),
                2 => transported_parametric_surface(2, &[(0.0, half_pi)], resolution, |u| {
                    let (s, co) = u[0].sin_cos();
                    (vec![r * co, r * s], vec![vec![-r * s, r * co]])
                }),
                3 => transported_parametric_surface(3, &[(0.0, half_pi), (0.0, half_pi)], resolution, |u| {
                    let (st, ct) = u[0].sin_cos();
                    let (sp, cp) = u[1].sin_cos();
                    (
                        vec![r * st * cp, r * st * sp, r * ct],
                        vec![vec![r * ct * cp, r * ct * sp, -r * st], vec![-r * st * sp, r * st * cp, 0.0]],
                    )
                }),
                _ => Err(Error::unsupported("vertex-ball surfaces are only sampled for d <= 3")),
            }
        }
        Family::EdgeCylinder => {
            let r = c.radius().expect("cylinder radius");
            if r > 1.0 + 1e-12 {
                return Err(Error::unsupported("edge cylinder is not valid at this volume"));
            }
            transported_parametric_surface(3, &[(0.0, half_pi), (0.0, 1.0)], resolution, |u| {
                let (s, co) = u[0].sin_cos();
                (vec![r * co, r * s, u[1]], vec![vec![-r * s, r * co, 0.0], vec![0.0, 0.0, 1.0]])
            })
        }
        Family::ProductLift => {
            let base = c.base.as_deref().expect("validated");
            Ok(transported_candidate_surface(base, resolution)?.lifted(d - base.dimension))
        }
    }
}

/// How [`decomposition_check`] samples the transported boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMethod {
    /// Exact evaluation; only available for slab-based candidates.
    ClosedForm,
    /// Surface quadrature with `resolution` nodes per parameter. Slabs use
    /// tensor hyperplane quadrature truncated at [`DEFAULT_EXTENT`].
    Quadrature { resolution: usize },
}

fn is_slab_based(c: &CandidateSpec) -> bool {
    match c.family {
        Family::AxisSlab => true,
        Family::ProductLift => c.base.as_deref().is_some_and(is_slab_based),
        _ => false,
    }
}

/// Checks `Per(E)/√(2π) = Per_γ(F) + penalty(F)` for `F = Φ_d⁻¹(E)`.
///
/// `lhs` is the closed-form cube perimeter divided by `√(2π)`, `rhs` the
/// penalized functional of the sampled transported boundary, and the margin
/// is `lhs − rhs` (zero up to quadrature error).
pub fn decomposition_check(c: &CandidateSpec, method: DecompositionMethod) -> Result<BoundReport> {
    let perimeter = c.perimeter()?.ok_or_else(|| Error::unsupported("candidate family is not valid at this volume"))?;
    let surface = match method {
        DecompositionMethod::ClosedForm => {
            if !is_slab_based(c) {
                return Err(Error::unsupported("closed-form decomposition only covers axis slabs"));
            }
            transported_candidate_surface(c, 1)?
        }
        DecompositionMethod::Quadrature { resolution } => {
            if is_slab_based(c) {
                let mu = c.family_volume();
                let h = HalfspaceSpec::axis(c.dimension, 0, std_normal_quantile(mu)?)?;
                analytic_halfspace_surface(&h, c.dimension, DEFAULT_EXTENT, resolution)?
            } else {
                transported_candidate_surface(c, resolution)?
            }
        }
    };
    let value = penalized_functional(&surface);
    let lhs = perimeter * INV_SQRT_2PI;
    Ok(BoundReport::at_least(
        lhs,
        value.total,
        json!({
            "check": "decomposition",
            "candidate": c,
            "method": method,
            "gauss_perimeter": value.gauss_perimeter,
            "penalty": value.penalty,
            "nodes": surface.len(),
        }),
    ))
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and the
/// uniform law on `(0, 1)`. Sorts `values` in place.
pub fn ks_uniform_statistic(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values.iter().enumerate().fold(0.0_f64, |acc, (i, &u)| {
        let cdf = u.clamp(0.0, 1.0);
        let above = (i + 1) as f64 / n - cdf;
        let below = cdf - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// Pushes `n` Gaussian samples through [`to_cube`] and returns the KS statistic
/// of each coordinate against the uniform law.
pub fn pushforward_ks_test(d: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_dim(d)?;
    if n < 1000 {
        return Err(Error::domain("the push-forward test needs n >= 1000"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut coords = vec![Vec::with_capacity(n); d];
    let mut x = vec![0.0; d];
    for _ in 0..n {
        fill_standard_normal(&mut rng, &mut x);
        for (c, y) in coords.iter_mut().zip(to_cube(&x)) {
            c.push(y);
        }
    }
    Ok(coords.iter_mut().map(|c| ks_uniform_statistic(c)).collect())
}
