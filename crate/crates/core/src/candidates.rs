//! Closed-form candidate sets in the cube and the profiles they induce.
//!
//! Every family is described for volumes `μ ≤ ½` at the vertex `0` of the
//! cube; larger volumes use the complement (`Per(E) = Per((0,1)^d \ E)`).
//! A vertex ball of radius `r` is a genuine orthant of a ball only while
//! `r ≤ 1`; beyond that it meets the opposite faces and the closed form no
//! longer applies, so the family is reported as invalid there. The true range
//! where vertex balls are optimal is smaller than this geometric cutoff.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::{Dimension, ProfileCurve, Provenance};
use crate::gaussian::std_normal_quantile;
use crate::{Error, Result, MAX_DIMENSION};

/// Slack on the `r ≤ 1` validity cutoff, so that volumes whose radius is
/// exactly one up to rounding stay valid.
const RADIUS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    AxisSlab,
    VertexBall,
    EdgeCylinder,
    ProductLift,
}

/// A signed coordinate direction `±e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisDirection {
    pub axis: usize,
    pub positive: bool,
}

/// Symbolic description of a candidate set `E ⊆ (0,1)^d`.
///
/// Slabs are `{y_axis < λ}` for a positive direction and `{y_axis > 1 − λ}`
/// for a negative one. Vertex balls are centred at `0`, edge cylinders are
/// quarter-cylinders around the `y₃` axis, and a product lift is
/// `base × (0,1)^{d − d_base}`. When `complement` is set the set is the
/// complement of the family member of volume `1 − volume`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpec {
    pub family: Family,
    pub dimension: usize,
    pub volume: f64,
    pub direction: Option<AxisDirection>,
    pub base: Option<Box<CandidateSpec>>,
    #[serde(default)]
    pub complement: bool,
}

impl CandidateSpec {
    pub fn axis_slab(dimension: usize, volume: f64, direction: AxisDirection) -> Self {
        Self { family: Family::AxisSlab, dimension, volume, direction: Some(direction), base: None, complement: false }
    }

    pub fn vertex_ball(dimension: usize, volume: f64) -> Self {
        Self { family: Family::VertexBall, dimension, volume, direction: None, base: None, complement: false }
    }

    pub fn edge_cylinder(volume: f64) -> Self {
        Self { family: Family::EdgeCylinder, dimension: 3, volume, direction: None, base: None, complement: false }
    }

    pub fn product_lift(base: CandidateSpec, dimension: usize) -> Self {
        Self {
            family: Family::ProductLift,
            dimension,
            volume: base.volume,
            direction: None,
            base: Some(Box::new(base)),
            complement: false,
        }
    }

    /// The complement of `self` inside the cube.
    pub fn complemented(mut self) -> Self {
        self.complement = !self.complement;
        self.volume = 1.0 - self.volume;
        self
    }

    /// Volume of the underlying (non-complemented) family member.
    pub fn family_volume(&self) -> f64 {
        if self.complement {
            1.0 - self.volume
        } else {
            self.volume
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.dimension)?;
        check_volume(self.volume)?;
        match self.family {
            Family::AxisSlab => {
                let dir = self.direction.ok_or_else(|| Error::precondition("axis slab needs a direction"))?;
                if dir.axis >= self.dimension {
                    return Err(Error::domain(format!(
                        "slab axis {} out of range for dimension {}",
                        dir.axis, self.dimension
                    )));
                }
            }
            Family::VertexBall => {}
            Family::EdgeCylinder => {
                if self.dimension != 3 {
                    return Err(Error::domain("edge cylinders exist only in dimension 3"));
                }
            }
            Family::ProductLift => {
                let base = self.base.as_deref().ok_or_else(|| Error::precondition("product lift needs a base"))?;
                base.validate()?;
                if base.dimension >= self.dimension {
                    return Err(Error::domain("product lift must increase the dimension"));
                }
                if base.volume != self.family_volume() {
                    return Err(Error::precondition("product lift volume differs from its base"));
                }
            }
        }
        Ok(())
    }

    /// Relative perimeter `Per(E, (0,1)^d)`, or `None` when the family is not
    /// valid at this volume.
    pub fn perimeter(&self) -> Result<Option<f64>> {
        self.validate()?;
        let mu = self.family_volume();
        Ok(match self.family {
            Family::AxisSlab => Some(slab_value(mu)),
            Family::VertexBall => vertex_ball_perimeter(self.dimension, mu)?,
            Family::EdgeCylinder => edge_cylinder_perimeter(mu)?,
            Family::ProductLift => self.base.as_deref().expect("validated").perimeter()?,
        })
    }

    /// Radius of the ball or cylinder underlying the candidate, if any.
    pub fn radius(&self) -> Option<f64> {
        let mu = self.family_volume();
        match self.family {
            Family::VertexBall => Some(vertex_ball_radius(self.dimension, mu)),
            Family::EdgeCylinder => Some(edge_cylinder_radius(mu)),
            Family::ProductLift => self.base.as_deref().and_then(CandidateSpec::radius),
            Family::AxisSlab => None,
        }
    }

    /// Signed distance-like level function: positive inside the set, zero on
    /// its relative boundary. Used to initialise phase fields.
    pub fn level(&self, y: &[f64]) -> f64 {
        let mu = self.family_volume();
        let inner = match self.family {
            Family::AxisSlab => {
                let dir = self.direction.expect("slab without direction");
                let c = y[dir.axis];
                if dir.positive {
                    mu - c
                } else {
                    c - (1.0 - mu)
                }
            }
            Family::VertexBall => {
                let r = vertex_ball_radius(self.dimension, mu);
                r - y[..self.dimension].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            Family::EdgeCylinder => edge_cylinder_radius(mu) - y[0].hypot(y[1]),
            Family::ProductLift => self.base.as_deref().expect("lift without base").level(y),
        };
        if self.complement {
            -inner
        } else {
            inner
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.level(y) > 0.0
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::domain(format!("dimension must be in 1..={MAX_DIMENSION}, got {d}")));
    }
    Ok(())
}

fn check_volume(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("volume must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

fn slab_value(mu: f64) -> f64 {
    if mu == 0.0 || mu == 1.0 {
        0.0
    } else {
        1.0
    }
}

/// Volume `|B₁|` of the unit ball in `R^d`, via `V_d = V_{d−2}·2π/d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let (mut v, start) = if d.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Perimeter of the axis slab of volume `λ` in dimension `d` (1, or 0 for the
/// degenerate volumes 0 and 1), together with its description.
pub fn slab_perimeter(d: usize, lambda: f64) -> Result<(f64, CandidateSpec)> {
    check_dimension(d)?;
    check_volume(lambda)?;
    Ok((slab_value(lambda), CandidateSpec::axis_slab(d, lambda, AxisDirection { axis: 0, positive: true })))
}

fn vertex_ball_radius(d: usize, lambda: f64) -> f64 {
    (2f64.powi(d as i32) * lambda / unit_ball_volume(d)).powf(1.0 / d as f64)
}

/// Relative perimeter `½·d·|B₁|^{1/d}·λ^{(d−1)/d}` of the ball of volume `λ`
/// centred at a vertex, or `None` once its radius exceeds 1.
pub fn vertex_ball_perimeter(d: usize, lambda: f64) -> Result<Option<f64>> {
    check_dimension(d)?;
    check_volume(lambda)?;
    if lambda == 0.0 {
        return Ok(Some(0.0));
    }
    if vertex_ball_radius(d, lambda) > 1.0 + RADIUS_SLACK {
        return Ok(None);
    }
    let df = d as f64;
    Ok(Some(0.5 * df * unit_ball_volume(d).powf(1.0 / df) * lambda.powf((df - 1.0) / df)))
}

fn edge_cylinder_radius(lambda: f64) -> f64 {
    (4.0 * lambda / PI).sqrt()
}

/// Relative perimeter `√(πλ)` of the quarter-cylinder along an edge of
/// `(0,1)³`, or `None` once its radius exceeds 1.
pub fn edge_cylinder_perimeter(lambda: f64) -> Result<Option<f64>> {
    check_volume(lambda)?;
    if edge_cylinder_radius(lambda) > 1.0 + RADIUS_SLACK {
        return Ok(None);
    }
    Ok(Some((PI * lambda).sqrt()))
}

/// The isoperimetric profile of the unit square, `min(√(π·min(λ,1−λ)), 1)`.
pub fn exact_profile_2d(lambda: f64) -> Result<f64> {
    check_volume(lambda)?;
    let mu = lambda.min(1.0 - lambda);
    Ok((PI * mu).sqrt().min(1.0))
}

/// Profile of `(0,1)³` assuming minimisers are vertex balls, edge cylinders or
/// slabs: the smallest valid value among the three families.
pub fn conjectural_profile_3d(lambda: f64) -> Result<f64> {
    check_volume(lambda)?;
    let mu = lambda.min(1.0 - lambda);
    if mu == 0.0 {
        return Ok(0.0);
    }
    let mut best = 1.0_f64;
    if let Some(v) = vertex_ball_perimeter(3, mu)? {
        best = best.min(v);
    }
    if let Some(v) = edge_cylinder_perimeter(mu)? {
        best = best.min(v);
    }
    Ok(best)
}

/// Dimension-free lower bound `√(2π)·I_γ(λ)` on every cube profile,
/// evaluated as `e^{−z²/2}` with `z = Φ⁻¹(λ)` so that the value at ½ is
/// exactly 1.
pub fn lower_bound_profile(lambda: f64) -> Result<f64> {
    check_volume(lambda)?;
    if lambda == 0.0 || lambda == 1.0 {
        return Ok(0.0);
    }
    let z = std_normal_quantile(lambda)?;
    Ok((-0.5 * z * z).exp())
}

/// Reinterprets a `d`-dimensional profile as an upper bound for dimension
/// `d + 1` (the map `E ↦ E × (0,1)` keeps both volume and perimeter).
pub fn lift_product(curve: &ProfileCurve) -> Result<ProfileCurve> {
    match curve.dimension() {
        Dimension::Finite(d) => Ok(curve.clone().with_dimension(Dimension::Finite(d + 1))),
        Dimension::Infinite => Err(Error::domain("cannot lift a dimension-free curve")),
    }
}

/// The candidate with the smallest perimeter at volume `λ` among slabs and
/// the (possibly lifted) vertex balls of dimensions `1..=d`. The planar
/// quarter disk lifted to `d = 3` is reported as an edge cylinder.
pub fn best_candidate(d: usize, lambda: f64) -> Result<(f64, CandidateSpec)> {
    check_dimension(d)?;
    check_volume(lambda)?;
    let mu = lambda.min(1.0 - lambda);
    let (mut best_value, mut best) = slab_perimeter(d, mu)?;
    if mu > 0.0 {
        for k in (1..=d).rev() {
            if let Some(v) = vertex_ball_perimeter(k, mu)? {
                // Ties keep the slab or the higher-dimensional ball.
                if v < best_value {
                    best_value = v;
                    best = lifted_ball(k, d, mu);
                }
            }
        }
    }
    if lambda > 0.5 {
        best = best.complemented();
    }
    Ok((best_value, best))
}

fn lifted_ball(k: usize, d: usize, mu: f64) -> CandidateSpec {
    if k == d {
        return CandidateSpec::vertex_ball(d, mu);
    }
    if k == 2 && d >= 3 {
        let cyl = CandidateSpec::edge_cylinder(mu);
        return if d == 3 { cyl } else { CandidateSpec::product_lift(cyl, d) };
    }
    CandidateSpec::product_lift(CandidateSpec::vertex_ball(k, mu), d)
}

/// Value of the candidate envelope of dimension `d` at `λ`.
pub fn envelope_value(d: usize, lambda: f64) -> Result<f64> {
    Ok(best_candidate(d, lambda)?.0)
}

/// Pointwise minimum over all valid candidate families and their lifts up to
/// dimension `d`, sampled on `lambdas`.
pub fn candidate_envelope(d: usize, lambdas: &[f64]) -> Result<ProfileCurve> {
    check_dimension(d)?;
    let values = lambdas.iter().map(|&l| envelope_value(d, l)).collect::<Result<Vec<_>>>()?;
    ProfileCurve::new(lambdas.to_vec(), values, Dimension::Finite(d), Provenance::Candidate)
}

/// The exact square profile sampled on `lambdas`.
pub fn exact_curve_2d(lambdas: &[f64]) -> Result<ProfileCurve> {
    let values = lambdas.iter().map(|&l| exact_profile_2d(l)).collect::<Result<Vec<_>>>()?;
    ProfileCurve::new(lambdas.to_vec(), values, Dimension::Finite(2), Provenance::Exact)
}

/// The interval profile (value 1 on the open interval) sampled on `lambdas`.
pub fn exact_curve_1d(lambdas: &[f64]) -> Result<ProfileCurve> {
    let values = lambdas.iter().map(|&l| slab_perimeter(1, l).map(|p| p.0)).collect::<Result<Vec<_>>>()?;
    ProfileCurve::new(lambdas.to_vec(), values, Dimension::Finite(1), Provenance::Exact)
}

/// `√(2π)·I_γ` sampled on `lambdas`.
pub fn lower_bound_curve(lambdas: &[f64]) -> Result<ProfileCurve> {
    let values = lambdas.iter().map(|&l| lower_bound_profile(l)).collect::<Result<Vec<_>>>()?;
    ProfileCurve::new(lambdas.to_vec(), values, Dimension::Infinite, Provenance::LowerBound)
}
