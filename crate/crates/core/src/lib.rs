//! Numerical toolkit for the relative isoperimetric problem in the unit cube
//! `(0,1)^d` and its reformulation in Gaussian space.
//!
//! The crate is organised by subsystem:
//!
//! - [`gaussian`]: scalar and `d`-dimensional Gaussian primitives (`φ`, `Φ`,
//!   `Φ⁻¹`, the Gaussian isoperimetric profile `I_γ = φ∘Φ⁻¹`, seeded sampling).
//! - [`transport`]: the coordinatewise map `Φ_d : R^d → (0,1)^d`, the
//!   Jacobian of a linear map restricted to a hyperplane, the boundary weight
//!   and the penalized Gaussian functional.
//! - [`candidates`]: closed-form candidate profiles (slabs, vertex balls, edge
//!   cylinders, product lifts), the exact square profile, the conjectural cube
//!   profile and the Gaussian lower bound `√(2π)·I_γ`.
//! - [`discrete`]: voxel sets with interior-face perimeter and an exhaustive
//!   minimiser used as ground truth on tiny grids.
//! - [`optimizer`]: phase-field relaxation plus volume-preserving threshold
//!   dynamics, producing numerical upper bounds on the cube profile.
//! - [`bounds`]: evaluators for the quantitative slicing and strip lemmas and
//!   the pointwise inequalities used in the dimension-free gap argument.
//! - [`fuzz`]: seeded random configurations for those evaluators.

// `!(x < y)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod candidates;
pub mod curve;
pub mod discrete;
mod error;
pub mod fuzz;
pub mod gaussian;
pub mod optimizer;
mod quad;
pub mod report;
pub mod transport;

pub use curve::{Dimension, ProfileCurve, Provenance};
pub use error::{Error, Result};
pub use report::BoundReport;

/// `√(2π)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// `1/√(2π)`, the Gaussian density at the origin.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Largest dimension accepted by the transport and candidate routines.
pub const MAX_DIMENSION: usize = 16;
