//! Sampled isoperimetric profiles.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Where the values of a [`ProfileCurve`] come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Candidate,
    LowerBound,
    Numerical,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Candidate => "candidate",
            Provenance::LowerBound => "lower_bound",
            Provenance::Numerical => "numerical",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Provenance::Exact),
            "candidate" => Ok(Provenance::Candidate),
            "lower_bound" => Ok(Provenance::LowerBound),
            "numerical" => Ok(Provenance::Numerical),
            other => Err(Error::Parse(format!("unknown provenance `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Finite(usize),
    /// Dimension-free curves such as the Gaussian lower bound.
    Infinite,
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dimension::Finite(d) => write!(f, "{d}"),
            Dimension::Infinite => f.write_str("inf"),
        }
    }
}

/// A profile `λ ↦ value` sampled on an increasing grid in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    lambdas: Vec<f64>,
    values: Vec<f64>,
    dimension: Dimension,
    provenance: Provenance,
}

impl ProfileCurve {
    /// Builds a curve, checking that the grid is increasing inside `[0, 1]`,
    /// that values are finite and nonnegative and that endpoint values vanish.
    pub fn new(lambdas: Vec<f64>, values: Vec<f64>, dimension: Dimension, provenance: Provenance) -> Result<Self> {
        if lambdas.len() != values.len() {
            return Err(Error::precondition(format!("{} grid points but {} values", lambdas.len(), values.len())));
        }
        if dimension == Dimension::Finite(0) {
            return Err(Error::domain("dimension must be positive"));
        }
        for w in lambdas.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::precondition("lambda grid must be strictly increasing"));
            }
        }
        for (&l, &v) in lambdas.iter().zip(&values) {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::domain(format!("lambda {l} outside [0, 1]")));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::precondition(format!("value {v} at lambda {l} is not >= 0")));
            }
            if (l == 0.0 || l == 1.0) && v != 0.0 {
                return Err(Error::precondition(format!("endpoint value at lambda {l} must be 0")));
            }
        }
        Ok(Self { lambdas, values, dimension, provenance })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambdas.iter().copied().zip(self.values.iter().copied())
    }

    pub(crate) fn with_dimension(mut self, dimension: Dimension) -> Self {
        self.dimension = dimension;
        self
    }

    /// Largest `|value(λ) − value(1−λ)|` over grid pairs that are mirror
    /// images of each other (within `1e−12`).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            let j = n - 1 - i;
            if (self.lambdas[i] + self.lambdas[j] - 1.0).abs() <= 1e-12 {
                worst = worst.max((self.values[i] - self.values[j]).abs());
            }
        }
        worst
    }

    /// Largest positive part of the second divided differences; zero for a
    /// concave sampled curve.
    pub fn concavity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 1..self.len().saturating_sub(1) {
            let (x0, x1, x2) = (self.lambdas[k - 1], self.lambdas[k], self.lambdas[k + 1]);
            let (y0, y1, y2) = (self.values[k - 1], self.values[k], self.values[k + 1]);
            let s01 = (y1 - y0) / (x1 - x0);
            let s12 = (y2 - y1) / (x2 - x1);
            let second = 2.0 * (s12 - s01) / (x2 - x0);
            worst = worst.max(second);
        }
        worst
    }
}

/// `points` equally spaced values covering `[0, 1]`, endpoints included.
pub fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::domain("a uniform grid needs at least 2 points"));
    }
    let m = (points - 1) as f64;
    Ok((0..points).map(|i| i as f64 / m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_curves() {
        let fin = Dimension::Finite(2);
        assert!(ProfileCurve::new(vec![0.0, 0.5], vec![0.0], fin, Provenance::Exact).is_err());
        assert!(ProfileCurve::new(vec![0.5, 0.2], vec![1.0, 1.0], fin, Provenance::Exact).is_err());
        assert!(ProfileCurve::new(vec![0.0, 0.5], vec![0.1, 1.0], fin, Provenance::Exact).is_err());
        assert!(ProfileCurve::new(vec![0.5], vec![-1.0], fin, Provenance::Exact).is_err());
        assert!(ProfileCurve::new(vec![0.5], vec![1.0], Dimension::Finite(0), Provenance::Exact).is_err());
    }

    #[test]
    fn defects() {
        let grid = uniform_grid(5).unwrap();
        let c = ProfileCurve::new(grid.clone(), vec![0.0, 1.0, 1.0, 1.0, 0.0], Dimension::Finite(1), Provenance::Exact)
            .unwrap();
        assert_eq!(c.symmetry_defect(), 0.0);
        assert_eq!(c.concavity_defect(), 0.0);
        let c =
            ProfileCurve::new(grid, vec![0.0, 1.0, 0.5, 1.0, 0.0], Dimension::Finite(1), Provenance::Exact).unwrap();
        assert!(c.concavity_defect() > 0.0);
    }

    #[test]
    fn provenance_round_trip() {
        for p in [Provenance::Exact, Provenance::Candidate, Provenance::LowerBound, Provenance::Numerical] {
            assert_eq!(p.as_str().parse::<Provenance>().unwrap(), p);
        }
    }
}
