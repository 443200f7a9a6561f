//! Numerical upper bounds on the cube profile by perimeter minimisation at
//! fixed volume.
//!
//! Fields live on the cell-centred grid of `(0,1)^d` with spacing `h = 1/n`,
//! stored row-major. All operators are Neumann (zero flux): the discrete
//! Laplacian couples only neighbouring nodes inside the cube, so its
//! eigenvectors are products of DCT-II modes and cube faces carry no energy.
//!
//! A run has three parts:
//!
//! 1. Allen–Cahn relaxation of the Modica–Mortola energy
//!    `(1/c_W)·∫ (ε/2)|∇u|² + W(u)/ε` with `W(u) = u²(1−u)²`,
//!    `c_W = √2/6`, through a decreasing schedule of `ε`. Each step is
//!    semi-implicit and stabilised and is followed by projection onto
//!    `{0 ≤ u ≤ 1, mean u = λ}` (shift then clamp).
//! 2. Volume-preserving threshold dynamics: diffuse for time `(σh)²/2`, then
//!    keep the `λN` nodes with the largest diffused values. Each step cannot
//!    increase the heat-content energy `L(u) = Σ (1−u)·G u`, because `L` is
//!    concave and the step minimises its linearisation.
//! 3. The estimate is `h^{d−1}·L(u)/Q(σ)`, where `Q(σ)` is the heat content
//!    of a single flat interface for the same discrete operator. A flat slab
//!    therefore scores exactly 1, and curved interfaces approach their
//!    perimeter as `h → 0` at fixed `σ`. The one fractional node left by
//!    the volume constraint is resolved by interpolating between its two
//!    sharp roundings.
//!
//! Field dumps: the binary format is a 16-byte little-endian header
//! (`u32` dimension, `u32` grid_n, `f64` epsilon) followed by the `n^d` node
//! values as little-endian `f64` in row-major order. The text format is a
//! header line `isocube-field <dimension> <grid_n> <epsilon>` followed by one
//! value per line in the same order.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use rand::Rng;
use rustdct::{DctPlanner, TransformType2And3};
use serde::{Deserialize, Serialize};

use crate::candidates::{best_candidate, envelope_value, lower_bound_profile, AxisDirection, CandidateSpec};
use crate::curve::{Dimension, ProfileCurve, Provenance};
use crate::discrete::VoxelSet;
use crate::gaussian::stream_rng;
use crate::{Error, Result};

/// Largest dimension handled by the optimizer.
pub const MAX_OPT_DIMENSION: usize = 4;

/// Largest node count `n^d`.
pub const MAX_NODES: usize = 1 << 24;

/// `c_W = ∫₀¹ √(2W)` for `W(u) = u²(1−u)²`.
pub const C_W: f64 = std::f64::consts::SQRT_2 / 6.0;

/// Values may leave `[0, 1]` by at most this much.
const RANGE_SLACK: f64 = 1e-9;

fn node_count(d: usize, n: usize) -> Result<usize> {
    if d == 0 || d > MAX_OPT_DIMENSION {
        return Err(Error::unsupported(format!("optimizer dimension must be in 1..={MAX_OPT_DIMENSION}, got {d}")));
    }
    if n < 2 {
        return Err(Error::domain("grid needs at least two nodes per side"));
    }
    (0..d)
        .try_fold(1usize, |acc, _| acc.checked_mul(n))
        .filter(|&c| c <= MAX_NODES)
        .ok_or_else(|| Error::TooLarge { what: "phase-field nodes".into(), cap: MAX_NODES })
}

/// Neumann spectral operators on the `n^d` cell-centred grid.
pub struct Spectral {
    dimension: usize,
    grid_n: usize,
    dct: Arc<dyn TransformType2And3<f64>>,
    /// Eigenvalues of the 1-D negative Laplacian, `(2 − 2cos(πk/n))/h²`.
    eigen: Vec<f64>,
}

impl Spectral {
    pub fn new(dimension: usize, grid_n: usize) -> Result<Self> {
        node_count(dimension, grid_n)?;
        let dct = DctPlanner::new().plan_dct2(grid_n);
        let n = grid_n as f64;
        let eigen = (0..grid_n).map(|k| (2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n).cos()) * n * n).collect();
        Ok(Self { dimension, grid_n, dct, eigen })
    }

    /// Applies `op` to every grid line along `axis`.
    fn for_lines(&self, data: &mut [f64], axis: usize, mut op: impl FnMut(&mut [f64])) {
        let n = self.grid_n;
        let stride = n.pow((self.dimension - 1 - axis) as u32);
        let mut line = vec![0.0; n];
        for outer in (0..data.len()).step_by(n * stride) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                op(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }

    fn forward(&self, data: &mut [f64]) {
        let mut scratch = vec![0.0; rustdct::RequiredScratch::get_scratch_len(&*self.dct)];
        for axis in 0..self.dimension {
            self.for_lines(data, axis, |l| self.dct.process_dct2_with_scratch(l, &mut scratch));
        }
    }

    /// Inverse of [`Spectral::forward`]; an unnormalised DCT-III undoes a
    /// DCT-II up to the factor `n/2` per axis.
    fn inverse(&self, data: &mut [f64]) {
        let mut scratch = vec![0.0; rustdct::RequiredScratch::get_scratch_len(&*self.dct)];
        for axis in 0..self.dimension {
            self.for_lines(data, axis, |l| self.dct.process_dct3_with_scratch(l, &mut scratch));
        }
        let scale = (2.0 / self.grid_n as f64).powi(self.dimension as i32);
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Sum of the 1-D eigenvalues for the mode at flat index `idx`.
    fn mode_eigen(&self, idx: usize) -> f64 {
        let mut rest = idx;
        let mut sum = 0.0;
        for _ in 0..self.dimension {
            sum += self.eigen[rest % self.grid_n];
            rest /= self.grid_n;
        }
        sum
    }

    /// `e^{tΔ} u` for the Neumann Laplacian, axis by axis.
    pub fn heat(&self, u: &[f64], t: f64) -> Vec<f64> {
        let mut out = u.to_vec();
        let decay: Vec<f64> = self.eigen.iter().map(|m| (-t * m).exp()).collect();
        let scale = 2.0 / self.grid_n as f64;
        let mut scratch = vec![0.0; rustdct::RequiredScratch::get_scratch_len(&*self.dct)];
        for axis in 0..self.dimension {
            self.for_lines(&mut out, axis, |l| {
                self.dct.process_dct2_with_scratch(l, &mut scratch);
                l.iter_mut().zip(&decay).for_each(|(v, e)| *v *= e * scale);
                self.dct.process_dct3_with_scratch(l, &mut scratch);
            });
        }
        out
    }

    /// Solves `(a − bΔ) v = rhs` in place.
    fn solve_shifted(&self, rhs: &mut [f64], a: f64, b: f64) {
        self.forward(rhs);
        for (idx, v) in rhs.iter_mut().enumerate() {
            *v /= a + b * self.mode_eigen(idx);
        }
        self.inverse(rhs);
    }

    /// Discrete Neumann Laplacian by finite differences (used in tests).
    pub fn laplacian_fd(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid_n;
        let h2 = (n * n) as f64;
        let mut out = vec![0.0; u.len()];
        let mut stride = 1;
        for _ in 0..self.dimension {
            for idx in 0..u.len() {
                let c = (idx / stride) % n;
                if c + 1 < n {
                    let diff = (u[idx + stride] - u[idx]) * h2;
                    out[idx] += diff;
                    out[idx + stride] -= diff;
                }
            }
            stride *= n;
        }
        out
    }
}

/// Nodal values in `[0, 1]` on the cell-centred grid with interface width
/// `epsilon` (cube units).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    dimension: usize,
    grid_n: usize,
    values: Vec<f64>,
    epsilon: f64,
}

impl PhaseField {
    pub fn new(dimension: usize, grid_n: usize, values: Vec<f64>, epsilon: f64) -> Result<Self> {
        let total = node_count(dimension, grid_n)?;
        if values.len() != total {
            return Err(Error::precondition(format!("{} values given, grid has {total} nodes", values.len())));
        }
        if !(epsilon.is_finite() && epsilon >= 1.0 / grid_n as f64 * (1.0 - 1e-12)) {
            return Err(Error::domain(format!("epsilon {epsilon} is below the grid spacing")));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= -RANGE_SLACK && **v <= 1.0 + RANGE_SLACK)) {
            return Err(Error::precondition(format!("field value {v} outside [0, 1]")));
        }
        Ok(Self { dimension, grid_n, values, epsilon })
    }

    pub fn constant(dimension: usize, grid_n: usize, value: f64, epsilon: f64) -> Result<Self> {
        let total = node_count(dimension, grid_n)?;
        Self::new(dimension, grid_n, vec![value; total], epsilon)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn h(&self) -> f64 {
        1.0 / self.grid_n as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Fraction of nodes with values in `(0.1, 0.9)`.
    pub fn diffuse_fraction(&self) -> f64 {
        self.values.iter().filter(|&&v| v > 0.1 && v < 0.9).count() as f64 / self.values.len() as f64
    }

    pub fn complement(&self) -> Self {
        Self { values: self.values.iter().map(|v| 1.0 - v).collect(), ..self.clone() }
    }

    /// Cells whose nodal value exceeds `threshold`.
    pub fn to_voxels(&self, threshold: f64) -> Result<VoxelSet> {
        VoxelSet::from_cells(self.dimension, self.grid_n, self.values.iter().map(|&v| v > threshold).collect())
    }

    /// Nearest-node resampling onto an `m^d` grid.
    pub fn resample(&self, m: usize) -> Result<Self> {
        let total = node_count(self.dimension, m)?;
        let values = (0..total).map(|idx| self.values[resample_index(idx, self.dimension, m, self.grid_n)]).collect();
        Self::new(self.dimension, m, values, self.epsilon.max(1.0 / m as f64))
    }

    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&(self.dimension as u32).to_le_bytes())?;
        w.write_all(&(self.grid_n as u32).to_le_bytes())?;
        w.write_all(&self.epsilon.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header).map_err(|e| Error::Parse(format!("field header: {e}")))?;
        let d = u32::from_le_bytes(header[0..4].try_into().expect("4 bytes")) as usize;
        let n = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
        let eps = f64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
        let total = node_count(d, n)?;
        let mut bytes = vec![0u8; total * 8];
        r.read_exact(&mut bytes).map_err(|e| Error::Parse(format!("field values: {e}")))?;
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Self::new(d, n, values, eps)
    }

    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "isocube-field {} {} {:e}", self.dimension, self.grid_n, self.epsilon)?;
        for v in &self.values {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }

    pub fn read_text(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field dump".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "isocube-field" {
            return Err(Error::Parse(format!("bad field header `{header}`")));
        }
        let bad = |s: &str| Error::Parse(format!("bad header value `{s}`"));
        let d: usize = parts[1].parse().map_err(|_| bad(parts[1]))?;
        let n: usize = parts[2].parse().map_err(|_| bad(parts[2]))?;
        let eps: f64 = parts[3].parse().map_err(|_| bad(parts[3]))?;
        let mut values = Vec::new();
        for line in lines {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            values.push(line.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{line}`")))?);
        }
        Self::new(d, n, values, eps)
    }
}

/// Index on an `from^d` grid of the node nearest to node `idx` of an `to^d` grid.
fn resample_index(idx: usize, d: usize, to: usize, from: usize) -> usize {
    let mut rest = idx;
    let mut coords = vec![0usize; d];
    for axis in (0..d).rev() {
        coords[axis] = rest % to;
        rest /= to;
    }
    coords.iter().fold(0, |acc, &c| {
        let y = (c as f64 + 0.5) / to as f64;
        acc * from + ((y * from as f64) as usize).min(from - 1)
    })
}

fn double_well(u: f64) -> f64 {
    let v = u * (1.0 - u);
    v * v
}

fn double_well_prime(u: f64) -> f64 {
    2.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
}

/// Modica–Mortola energy normalised by `c_W`, with interface width
/// `f.epsilon()`. Only pairs of neighbouring nodes contribute to the
/// gradient term, so the cube faces are free.
pub fn relaxed_energy(f: &PhaseField) -> f64 {
    let n = f.grid_n;
    let h = f.h();
    let eps = f.epsilon;
    let cell = h.powi(f.dimension as i32);
    let u = &f.values;
    let mut grad = 0.0;
    let mut stride = 1;
    for _ in 0..f.dimension {
        for idx in 0..u.len() {
            if (idx / stride) % n + 1 < n {
                let diff = (u[idx + stride] - u[idx]) / h;
                grad += diff * diff;
            }
        }
        stride *= n;
    }
    let well: f64 = u.iter().map(|&v| double_well(v)).sum();
    (0.5 * eps * grad + well / eps) * cell / C_W
}

/// Shifts and clamps `values` so that their mean is `lambda`.
pub fn project_volume(values: &mut [f64], lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(format!("volume must lie in (0, 1), got {lambda}")));
    }
    let n = values.len() as f64;
    let mean_at = |c: f64| values.iter().map(|v| (v + c).clamp(0.0, 1.0)).sum::<f64>() / n;
    let lo_v = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_v = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (-hi_v, 1.0 - lo_v);
    let (mut g_lo, mut g_hi) = (mean_at(lo) - lambda, mean_at(hi) - lambda);
    let mut c = 0.0_f64.clamp(lo, hi);
    // Illinois regula falsi on the piecewise linear, nondecreasing mean.
    let mut side = 0i8;
    for _ in 0..200 {
        c = if g_hi > g_lo { (lo * g_hi - hi * g_lo) / (g_hi - g_lo) } else { 0.5 * (lo + hi) };
        if !(c > lo && c < hi) {
            c = 0.5 * (lo + hi);
        }
        let g = mean_at(c) - lambda;
        if g.abs() <= 1e-14 || hi - lo <= 1e-15 {
            break;
        }
        if g < 0.0 {
            lo = c;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    values.iter_mut().for_each(|v| *v = (*v + c).clamp(0.0, 1.0));
    Ok(())
}

/// How a run is initialised.
#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// Axis slab `{y₁ < λ}`.
    Slab,
    /// Vertex ball at the origin.
    CornerBall,
    /// Independent uniform values (null tests).
    Random,
    /// Closed-form candidate from the envelope at this volume.
    BestCandidate,
    VoxelWarmStart(VoxelSet),
    /// A previous field, resampled to the grid; its volume is reprojected.
    FieldWarmStart(PhaseField),
}

impl InitMode {
    pub fn label(&self) -> &'static str {
        match self {
            InitMode::Slab => "slab",
            InitMode::CornerBall => "corner_ball",
            InitMode::Random => "random",
            InitMode::BestCandidate => "best_candidate",
            InitMode::VoxelWarmStart(_) => "voxel_warm_start",
            InitMode::FieldWarmStart(_) => "field_warm_start",
        }
    }

    fn complement(&self) -> Self {
        match self {
            InitMode::VoxelWarmStart(v) => InitMode::VoxelWarmStart(v.complement()),
            InitMode::FieldWarmStart(f) => InitMode::FieldWarmStart(f.complement()),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub grid_n: usize,
    /// Interface widths in units of `h`, strictly decreasing and at least 1.
    pub epsilon_cells: Vec<f64>,
    /// Allen–Cahn time step as a multiple of `ε`.
    pub step: f64,
    pub max_iterations: usize,
    /// Allowed `|mean − λ|`.
    pub volume_tol: f64,
    /// Allen–Cahn stages stop once no node moves by more than this.
    pub stagnation_tol: f64,
    pub seed: u64,
    pub init: InitMode,
    /// Diffusion length of the threshold dynamics, in cells.
    pub sigma_cells: f64,
    pub refine_steps: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_n: 64,
            epsilon_cells: vec![8.0, 4.0, 2.0, 1.5],
            step: 1.0,
            max_iterations: 100,
            volume_tol: 1e-9,
            stagnation_tol: 1e-6,
            seed: 0,
            init: InitMode::BestCandidate,
            sigma_cells: 4.0,
            refine_steps: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn with_grid(grid_n: usize) -> Self {
        Self { grid_n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_cells.is_empty() {
            return Err(Error::precondition("epsilon schedule is empty"));
        }
        if self.epsilon_cells.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::precondition("epsilon schedule must be strictly decreasing"));
        }
        if self.epsilon_cells.iter().any(|&e| !(e >= 1.0 && e.is_finite())) {
            return Err(Error::precondition("epsilon must be at least one grid spacing"));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.step) || !positive(self.volume_tol) || !positive(self.stagnation_tol) {
            return Err(Error::precondition("step and tolerances must be positive"));
        }
        if !positive(self.sigma_cells) {
            return Err(Error::precondition("diffusion length must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub epsilon: f64,
    pub iterations: usize,
    pub energy: f64,
    pub settled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub dimension: usize,
    pub grid_n: usize,
    pub h: f64,
    pub epsilon_final: f64,
    pub sigma_cells: f64,
    pub init: String,
    pub stages: Vec<StageReport>,
    pub refine_steps: usize,
    /// Threshold dynamics reached a fixed point.
    pub converged: bool,
    pub volume_error: f64,
    /// Estimate with twice the diffusion length.
    pub estimate_coarse: f64,
    pub error_bar: f64,
    /// Which start produced the reported field: the relaxed phase field or
    /// the sharp initial set.
    pub winner: String,
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub estimate: f64,
    pub field: PhaseField,
    pub diagnostics: Diagnostics,
}

/// Heat content `Σ(1−u)·G u` of a single flat interface on a long 1-D grid,
/// with the same discrete heat operator (cell units).
fn flat_interface_content(sigma: f64) -> f64 {
    let mut m = ((20.0 * sigma).ceil() as usize).max(64);
    m += m % 2;
    let spec = Spectral::new(1, m).expect("1-D grid");
    let u: Vec<f64> = (0..m).map(|i| if i < m / 2 { 1.0 } else { 0.0 }).collect();
    // Cell units: rescale time by h² so that the kernel width is σ cells.
    let h = 1.0 / m as f64;
    let g = spec.heat(&u, 0.5 * sigma * sigma * h * h);
    u.iter().zip(&g).map(|(a, b)| (1.0 - a) * b).sum()
}

/// Normalised heat-content energy `h^{d−1}·Σ(1−u)·G_σ u / Q(σ)`; equals 1 on
/// a flat slab and approximates the relative perimeter of sharp sets.
pub fn threshold_energy(f: &PhaseField, sigma_cells: f64) -> Result<f64> {
    let spec = Spectral::new(f.dimension, f.grid_n)?;
    Ok(threshold_energy_with(&spec, f, sigma_cells, flat_interface_content(sigma_cells)))
}

fn threshold_energy_with(spec: &Spectral, f: &PhaseField, sigma: f64, flat: f64) -> f64 {
    content_energy(spec, &f.values, f.dimension, f.h(), sigma, flat)
}

fn content_energy(spec: &Spectral, u: &[f64], d: usize, h: f64, sigma: f64, flat: f64) -> f64 {
    let g = spec.heat(u, 0.5 * sigma * sigma * h * h);
    let content: f64 = u.iter().zip(&g).map(|(a, w)| (1.0 - a) * w).sum();
    content * h.powi(d as i32 - 1) / flat
}

/// Energy of a thresholded field with at most one fractional node, taken as
/// the volume-weighted mean of the energies of its two sharp neighbours
/// (fractional node emptied or filled). By concavity this never exceeds the
/// energy of the fractional field itself, and it removes the spurious
/// interface that a lone partial node would otherwise carry.
fn sharp_estimate(spec: &Spectral, f: &PhaseField, sigma: f64, flat: f64) -> f64 {
    let partial = f.values.iter().position(|&v| v > 0.0 && v < 1.0);
    let Some(i) = partial else {
        return threshold_energy_with(spec, f, sigma, flat);
    };
    let frac = f.values[i];
    let mut u = f.values.clone();
    u[i] = 0.0;
    let low = content_energy(spec, &u, f.dimension, f.h(), sigma, flat);
    u[i] = 1.0;
    let high = content_energy(spec, &u, f.dimension, f.h(), sigma, flat);
    (1.0 - frac) * low + frac * high
}

/// Result of [`threshold_refine`].
#[derive(Debug, Clone)]
pub struct Refined {
    pub field: PhaseField,
    /// Normalised energy before each step and after the last one.
    pub energies: Vec<f64>,
    pub fixed_point: bool,
}

/// Keeps the `λN` nodes with the largest `w` (ties broken by index) and one
/// fractional node so that the mean is exactly `λ`.
fn select_top(w: &[f64], lambda: f64) -> Vec<f64> {
    let total = w.len();
    let target = lambda * total as f64;
    let k = (target.floor() as usize).min(total);
    let frac = target - k as f64;
    let key = |i: usize| (w[i] * 1e12).round() as i64;
    let mut order: Vec<usize> = (0..total).collect();
    let cmp = |a: &usize, b: &usize| key(*b).cmp(&key(*a)).then(a.cmp(b));
    if k < total {
        order.select_nth_unstable_by(k, cmp);
    }
    let mut out = vec![0.0; total];
    for &i in &order[..k] {
        out[i] = 1.0;
    }
    if k < total && frac > 0.0 {
        out[order[k]] = frac;
    }
    out
}

/// Volume-preserving threshold dynamics at diffusion length `sigma_cells`.
///
/// The input is first projected to volume `λ`; every step diffuses for time
/// `(σh)²/2` and keeps the `λN` largest values. Stops early at a fixed point.
pub fn threshold_refine(f: &PhaseField, lambda: f64, steps: usize, sigma_cells: f64) -> Result<Refined> {
    if !(sigma_cells > 0.0) {
        return Err(Error::domain("diffusion length must be positive"));
    }
    let spec = Spectral::new(f.dimension, f.grid_n)?;
    let flat = flat_interface_content(sigma_cells);
    let h = f.h();
    let t = 0.5 * sigma_cells * sigma_cells * h * h;
    let mut u = f.values.clone();
    project_volume(&mut u, lambda)?;
    let mut energies = Vec::with_capacity(steps + 1);
    let mut fixed_point = false;
    let mut g = spec.heat(&u, t);
    for _ in 0..steps {
        let content: f64 = u.iter().zip(&g).map(|(a, b)| (1.0 - a) * b).sum();
        energies.push(content * h.powi(f.dimension as i32 - 1) / flat);
        let next = select_top(&g, lambda);
        if next == u {
            fixed_point = true;
            break;
        }
        u = next;
        g = spec.heat(&u, t);
    }
    let content: f64 = u.iter().zip(&g).map(|(a, b)| (1.0 - a) * b).sum();
    energies.push(content * h.powi(f.dimension as i32 - 1) / flat);
    let field = PhaseField::new(f.dimension, f.grid_n, u, f.epsilon)?;
    Ok(Refined { field, energies, fixed_point })
}

fn smoothed_indicator(level: f64, eps: f64) -> f64 {
    0.5 * (1.0 + (level / (std::f64::consts::SQRT_2 * eps)).tanh())
}

fn node_centres(d: usize, n: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = n.pow(d as u32);
    (0..total).map(move |idx| {
        let mut rest = idx;
        let mut y = vec![0.0; d];
        for axis in (0..d).rev() {
            y[axis] = ((rest % n) as f64 + 0.5) / n as f64;
            rest /= n;
        }
        y
    })
}

fn initial_values(d: usize, lambda: f64, cfg: &OptimizerConfig, eps: f64) -> Result<Vec<f64>> {
    let n = cfg.grid_n;
    let from_candidate =
        |c: CandidateSpec| -> Vec<f64> { node_centres(d, n).map(|y| smoothed_indicator(c.level(&y), eps)).collect() };
    let mut values = match &cfg.init {
        InitMode::Slab => {
            from_candidate(CandidateSpec::axis_slab(d, lambda, AxisDirection { axis: 0, positive: true }))
        }
        InitMode::CornerBall => from_candidate(CandidateSpec::vertex_ball(d, lambda)),
        InitMode::BestCandidate => from_candidate(best_candidate(d, lambda)?.1),
        InitMode::Random => {
            let mut rng = stream_rng(cfg.seed, 7);
            (0..n.pow(d as u32)).map(|_| rng.random::<f64>()).collect()
        }
        InitMode::VoxelWarmStart(v) => {
            if v.dimension() != d {
                return Err(Error::precondition("warm-start voxels have the wrong dimension"));
            }
            let m = v.grid_n();
            (0..n.pow(d as u32)).map(|i| if v.cells()[resample_index(i, d, n, m)] { 1.0 } else { 0.0 }).collect()
        }
        InitMode::FieldWarmStart(f) => {
            if f.dimension() != d {
                return Err(Error::precondition("warm-start field has the wrong dimension"));
            }
            f.resample(n)?.values
        }
    };
    project_volume(&mut values, lambda)?;
    Ok(values)
}

/// Minimises the discrete perimeter at volume `λ` and returns the normalised
/// heat-content energy of the final sharp field as an upper-bound estimate.
///
/// Volumes above ½ are solved through the complement, so the estimates at `λ`
/// and `1 − λ` coincide. The reported field is the better of two sharpened
/// starts: the Allen–Cahn relaxation of the initial field, and the initial
/// field itself.
pub fn minimize(d: usize, lambda: f64, cfg: &OptimizerConfig) -> Result<Optimized> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(format!("volume must lie in (0, 1), got {lambda}")));
    }
    node_count(d, cfg.grid_n)?;
    cfg.validate()?;
    if lambda > 0.5 {
        let mirrored = OptimizerConfig { init: cfg.init.complement(), ..cfg.clone() };
        let mut out = minimize(d, 1.0 - lambda, &mirrored)?;
        out.field = out.field.complement();
        out.diagnostics.volume_error = (out.field.mean() - lambda).abs();
        return Ok(out);
    }
    let n = cfg.grid_n;
    let h = 1.0 / n as f64;
    let spec = Spectral::new(d, n)?;
    let eps0 = cfg.epsilon_cells[0] * h;
    let start = initial_values(d, lambda, cfg, eps0)?;

    let mut u = start.clone();
    let mut stages = Vec::with_capacity(cfg.epsilon_cells.len());
    for &cells in &cfg.epsilon_cells {
        let eps = cells * h;
        let tau = cfg.step * eps;
        let stab = 2.0;
        let a = 1.0 + tau * stab / eps;
        let b = tau * eps;
        let mut settled = false;
        let mut iterations = 0;
        let mut rhs = vec![0.0; u.len()];
        while iterations < cfg.max_iterations {
            iterations += 1;
            for (r, &v) in rhs.iter_mut().zip(&u) {
                *r = a * v - tau / eps * double_well_prime(v);
            }
            spec.solve_shifted(&mut rhs, a, b);
            project_volume(&mut rhs, lambda)?;
            let change = rhs.iter().zip(&u).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            std::mem::swap(&mut u, &mut rhs);
            if change < cfg.stagnation_tol {
                settled = true;
                break;
            }
        }
        let field = PhaseField::new(d, n, u.clone(), eps)?;
        stages.push(StageReport { epsilon: eps, iterations, energy: relaxed_energy(&field), settled });
    }
    let eps_final = cfg.epsilon_cells.last().copied().expect("nonempty schedule") * h;

    let flat = flat_interface_content(cfg.sigma_cells);
    let relaxed = threshold_refine(&PhaseField::new(d, n, u, eps_final)?, lambda, cfg.refine_steps, cfg.sigma_cells)?;
    let direct =
        threshold_refine(&PhaseField::new(d, n, start, eps_final)?, lambda, cfg.refine_steps, cfg.sigma_cells)?;
    let score = |r: &Refined| sharp_estimate(&spec, &r.field, cfg.sigma_cells, flat);
    let (relaxed_score, direct_score) = (score(&relaxed), score(&direct));
    let (best, estimate, winner) = if relaxed_score <= direct_score {
        (relaxed, relaxed_score, "relaxed")
    } else {
        (direct, direct_score, "initial")
    };
    let coarse_sigma = 2.0 * cfg.sigma_cells;
    let estimate_coarse = sharp_estimate(&spec, &best.field, coarse_sigma, flat_interface_content(coarse_sigma));
    let volume_error = (best.field.mean() - lambda).abs();
    if volume_error > cfg.volume_tol {
        return Err(Error::precondition(format!("volume drifted by {volume_error:e}")));
    }
    let diagnostics = Diagnostics {
        dimension: d,
        grid_n: n,
        h,
        epsilon_final: eps_final,
        sigma_cells: cfg.sigma_cells,
        init: cfg.init.label().to_string(),
        stages,
        refine_steps: best.energies.len() - 1,
        converged: best.fixed_point,
        volume_error,
        estimate_coarse,
        error_bar: (estimate - estimate_coarse).abs() + h,
        winner: winner.to_string(),
    };
    Ok(Optimized { estimate, field: best.field, diagnostics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub estimate: f64,
    pub error_bar: f64,
    pub converged: bool,
    pub init: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub lambda: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    /// Successful points plus the endpoints `λ ∈ {0, 1}` when requested.
    pub curve: ProfileCurve,
    pub points: Vec<SweepPoint>,
    pub failures: Vec<SweepFailure>,
}
/// Runs `job` on every item using scoped worker threads; results keep the
/// input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], job: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len()).max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let done = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = job(&items[i]);
                done.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Runs [`minimize`] along an increasing `λ` grid, in two passes that each
/// parallelise across points. The first pass starts every point from the
/// configured init. The second warm-starts each point from the first-pass
/// field of its lower neighbour and keeps whichever estimate is lower, so the
/// outcome does not depend on scheduling. Points that error or leave the band
/// `[√(2π)I_γ − 1e−6, 1.05·envelope]` are recorded as failures and left out of
/// the curve.
pub fn profile_sweep(d: usize, lambdas: &[f64], cfg: &OptimizerConfig) -> Result<Sweep> {
    node_count(d, cfg.grid_n)?;
    cfg.validate()?;
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::precondition("lambda grid must be strictly increasing"));
    }
    let interior: Vec<f64> = lambdas.iter().copied().filter(|&l| l != 0.0 && l != 1.0).collect();
    let cold = parallel_map(&interior, |&lambda| minimize(d, lambda, cfg));
    let seeds: Vec<(f64, Option<&PhaseField>)> = interior
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i.checked_sub(1).and_then(|j| cold[j].as_ref().ok()).map(|r| &r.field)))
        .collect();
    let warm = parallel_map(&seeds, |(lambda, prev)| {
        prev.map(|f| {
            minimize(d, *lambda, &OptimizerConfig { init: InitMode::FieldWarmStart(f.clone()), ..cfg.clone() })
        })
    });

    let mut xs = Vec::with_capacity(lambdas.len());
    let mut ys = Vec::with_capacity(lambdas.len());
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut solved = cold.into_iter().zip(warm);
    for &lambda in lambdas {
        if lambda == 0.0 || lambda == 1.0 {
            xs.push(lambda);
            ys.push(0.0);
            continue;
        }
        let (first, second) = solved.next().expect("one result per interior point");
        let result = match (first, second) {
            (Ok(a), Some(Ok(b))) => Ok(if b.estimate < a.estimate { b } else { a }),
            (Err(_), Some(Ok(b))) => Ok(b),
            (a, _) => a,
        };
        let r = match result {
            Ok(r) => r,
            Err(e) => {
                failures.push(SweepFailure { lambda, reason: e.to_string() });
                continue;
            }
        };
        let floor = lower_bound_profile(lambda)? - 1e-6;
        let ceiling = 1.05 * envelope_value(d, lambda)?;
        if r.estimate < floor || r.estimate > ceiling {
            failures
                .push(SweepFailure { lambda, reason: format!("estimate {} outside [{floor}, {ceiling}]", r.estimate) });
            continue;
        }
        xs.push(lambda);
        ys.push(r.estimate);
        points.push(SweepPoint {
            lambda,
            estimate: r.estimate,
            error_bar: r.diagnostics.error_bar,
            converged: r.diagnostics.converged,
            init: r.diagnostics.init,
        });
    }
    let curve = ProfileCurve::new(xs, ys, Dimension::Finite(d), Provenance::Numerical)?;
    Ok(Sweep { curve, points, failures })
}
