//! Voxel sets on the regular grid of `(0,1)^d` and an exhaustive minimiser of
//! their relative perimeter.
//!
//! Cells are stored row-major (the last coordinate varies fastest). The
//! perimeter counts faces shared by two cells of the grid with different
//! indicator values; faces lying on `∂(0,1)^d` never count. Face counts are
//! kept as integers so that cached and recomputed perimeters agree exactly.

use std::fmt::Write as _;

use crate::gaussian::gaussian_profile;
use crate::{Error, Result, MAX_DIMENSION, SQRT_2PI};

/// Largest number of cells a [`VoxelSet`] may hold.
pub const MAX_CELLS: usize = 1 << 24;

/// Cell cap for plain exhaustive enumeration.
pub const EXHAUSTIVE_CAP: usize = 25;

/// Cell cap when optima are reported up to grid symmetries.
pub const SYMMETRIC_CAP: usize = 30;

/// Optimal table for `d = 2`, `n = 4`, `k = 1..=8`, one line per `k`:
/// `k min_faces min_perimeter optima_count`.
pub const GOLDEN_D2_N4: &str = include_str!("../data/oracle_d2_n4.golden");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VoxelSet {
    dimension: usize,
    grid_n: usize,
    cells: Vec<bool>,
    filled: usize,
    faces: u64,
}

fn cell_count(d: usize, n: usize) -> Result<usize> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::domain(format!("dimension must be in 1..={MAX_DIMENSION}, got {d}")));
    }
    if n == 0 {
        return Err(Error::domain("grid needs at least one cell per side"));
    }
    (0..d)
        .try_fold(1usize, |acc, _| acc.checked_mul(n))
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| Error::TooLarge { what: "voxel cells".into(), cap: MAX_CELLS })
}

impl VoxelSet {
    pub fn empty(dimension: usize, grid_n: usize) -> Result<Self> {
        let total = cell_count(dimension, grid_n)?;
        Ok(Self { dimension, grid_n, cells: vec![false; total], filled: 0, faces: 0 })
    }

    pub fn full(dimension: usize, grid_n: usize) -> Result<Self> {
        let mut v = Self::empty(dimension, grid_n)?;
        v.cells.iter_mut().for_each(|c| *c = true);
        v.filled = v.cells.len();
        Ok(v)
    }

    pub fn from_cells(dimension: usize, grid_n: usize, cells: Vec<bool>) -> Result<Self> {
        let total = cell_count(dimension, grid_n)?;
        if cells.len() != total {
            return Err(Error::precondition(format!("{} cells given, grid has {total}", cells.len())));
        }
        let mut v = Self { dimension, grid_n, cells, filled: 0, faces: 0 };
        v.filled = v.cells.iter().filter(|&&c| c).count();
        v.faces = v.count_faces();
        Ok(v)
    }

    /// Fills the cells whose centre satisfies `pred`.
    pub fn from_fn(dimension: usize, grid_n: usize, mut pred: impl FnMut(&[f64]) -> bool) -> Result<Self> {
        let total = cell_count(dimension, grid_n)?;
        let h = 1.0 / grid_n as f64;
        let mut centre = vec![0.0; dimension];
        let mut cells = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rest = idx;
            for axis in (0..dimension).rev() {
                centre[axis] = ((rest % grid_n) as f64 + 0.5) * h;
                rest /= grid_n;
            }
            cells.push(pred(&centre));
        }
        Self::from_cells(dimension, grid_n, cells)
    }

    fn from_mask(dimension: usize, grid_n: usize, mask: u64) -> Self {
        let total = grid_n.pow(dimension as u32);
        let cells = (0..total).map(|i| mask >> i & 1 == 1).collect();
        Self::from_cells(dimension, grid_n, cells).expect("mask fits the grid")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filled == 0
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    /// Number of interior faces separating filled from empty cells.
    pub fn face_count(&self) -> u64 {
        self.faces
    }

    pub fn cell_volume(&self) -> f64 {
        (self.grid_n as f64).powi(-(self.dimension as i32))
    }

    pub fn face_area(&self) -> f64 {
        (self.grid_n as f64).powi(1 - self.dimension as i32)
    }

    pub fn discrete_volume(&self) -> f64 {
        self.filled as f64 * self.cell_volume()
    }

    pub fn discrete_perimeter(&self) -> f64 {
        self.faces as f64 * self.face_area()
    }

    pub fn get(&self, index: usize) -> Result<bool> {
        self.cells.get(index).copied().ok_or(Error::IndexOutOfRange { index, len: self.cells.len() })
    }

    pub fn index_of(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dimension {
            return Err(Error::domain("coordinate count differs from the dimension"));
        }
        let mut idx = 0;
        for &c in coords {
            if c >= self.grid_n {
                return Err(Error::IndexOutOfRange { index: c, len: self.grid_n });
            }
            idx = idx * self.grid_n + c;
        }
        Ok(idx)
    }

    pub fn coords_of(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.cells.len() {
            return Err(Error::IndexOutOfRange { index, len: self.cells.len() });
        }
        let mut out = vec![0; self.dimension];
        let mut rest = index;
        for axis in (0..self.dimension).rev() {
            out[axis] = rest % self.grid_n;
            rest /= self.grid_n;
        }
        Ok(out)
    }

    /// Calls `f(neighbour)` for each grid neighbour of `index`.
    fn for_each_neighbour(&self, index: usize, mut f: impl FnMut(usize)) {
        let n = self.grid_n;
        let mut stride = 1;
        let mut rest = index;
        for _ in 0..self.dimension {
            let c = rest % n;
            rest /= n;
            if c > 0 {
                f(index - stride);
            }
            if c + 1 < n {
                f(index + stride);
            }
            stride *= n;
        }
    }

    fn count_faces(&self) -> u64 {
        let n = self.grid_n;
        let mut faces = 0;
        let mut stride = 1;
        for _ in 0..self.dimension {
            for idx in 0..self.cells.len() {
                if (idx / stride) % n + 1 < n && self.cells[idx] != self.cells[idx + stride] {
                    faces += 1;
                }
            }
            stride *= n;
        }
        faces
    }

    /// Full recount of the interior faces, ignoring the cache.
    pub fn recompute_face_count(&self) -> u64 {
        self.count_faces()
    }

    /// Toggles one cell, updating the cached counts in `O(d)`. Returns the
    /// change in the face count.
    pub fn flip(&mut self, index: usize) -> Result<i64> {
        let current = self.get(index)?;
        let (mut neighbours, mut differing) = (0i64, 0i64);
        self.for_each_neighbour(index, |j| {
            neighbours += 1;
            if self.cells[j] != current {
                differing += 1;
            }
        });
        let delta = neighbours - 2 * differing;
        self.cells[index] = !current;
        if current {
            self.filled -= 1;
        } else {
            self.filled += 1;
        }
        self.faces = (self.faces as i64 + delta) as u64;
        Ok(delta)
    }

    pub fn complement(&self) -> Self {
        Self {
            dimension: self.dimension,
            grid_n: self.grid_n,
            cells: self.cells.iter().map(|c| !c).collect(),
            filled: self.cells.len() - self.filled,
            faces: self.faces,
        }
    }

    /// Text export: `d = 1` is a single line; `d = 2` has one line per value
    /// of the first coordinate; higher dimensions print such `n × n` blocks in
    /// row-major order of the leading coordinates, separated by blank lines.
    pub fn to_bit_matrix(&self) -> String {
        let n = self.grid_n;
        let mut out = String::with_capacity(self.cells.len() * 2);
        let block = if self.dimension == 1 { n } else { n * n };
        for (b, chunk) in self.cells.chunks(block).enumerate() {
            if b > 0 {
                out.push('\n');
            }
            for row in chunk.chunks(n) {
                for &c in row {
                    out.push(if c { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parses the output of [`VoxelSet::to_bit_matrix`].
    pub fn from_bit_matrix(dimension: usize, text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let n = rows.first().map(|r| r.len()).ok_or_else(|| Error::Parse("empty bit matrix".into()))?;
        let mut cells = Vec::new();
        for row in &rows {
            if row.len() != n {
                return Err(Error::Parse(format!("row `{row}` has length {}, expected {n}", row.len())));
            }
            for ch in row.chars() {
                cells.push(match ch {
                    '0' => false,
                    '1' => true,
                    other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
                });
            }
        }
        let total = cell_count(dimension, n)?;
        if cells.len() != total {
            return Err(Error::Parse(format!("{} cells read, expected {total}", cells.len())));
        }
        Self::from_cells(dimension, n, cells)
    }
}

/// Outcome of [`exhaustive_min`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub dimension: usize,
    pub grid_n: usize,
    pub k: usize,
    pub min_faces: u64,
    pub min_perimeter: f64,
    /// All minimisers in increasing bitmask order (cell `i` is bit `i`), or
    /// one canonical member per symmetry orbit when `symmetry_reduced`.
    pub optima: Vec<VoxelSet>,
    pub symmetry_reduced: bool,
    pub subsets_examined: u64,
}

/// Next `k`-subset in colexicographic order (Gosper's hack).
fn next_combination(x: u64) -> u64 {
    let lowest = x & x.wrapping_neg();
    let ripple = x + lowest;
    ripple | (((x ^ ripple) >> 2) / lowest)
}

/// Images of the cell indices under every symmetry of the grid (axis
/// permutations combined with reflections).
fn symmetry_maps(d: usize, n: usize) -> Vec<Vec<usize>> {
    let total = n.pow(d as u32);
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        let mut longer = Vec::new();
        for p in &perms {
            for a in (0..d).filter(|a| !p.contains(a)) {
                let mut q = p.clone();
                q.push(a);
                longer.push(q);
            }
        }
        perms = longer;
    }
    let mut maps = Vec::with_capacity(perms.len() << d);
    let mut coords = vec![0; d];
    for perm in &perms {
        for flips in 0..1usize << d {
            let map = (0..total)
                .map(|idx| {
                    let mut rest = idx;
                    for axis in (0..d).rev() {
                        coords[axis] = rest % n;
                        rest /= n;
                    }
                    perm.iter().enumerate().fold(0, |acc, (axis, &src)| {
                        let c = coords[src];
                        acc * n + if flips >> axis & 1 == 1 { n - 1 - c } else { c }
                    })
                })
                .collect();
            maps.push(map);
        }
    }
    maps
}

fn canonical(mask: u64, maps: &[Vec<usize>]) -> u64 {
    maps.iter()
        .map(|map| map.iter().enumerate().fold(0u64, |m, (i, &j)| m | (mask >> i & 1) << j))
        .min()
        .unwrap_or(mask)
}

/// Exact minimum of the discrete relative perimeter over all `k`-cell subsets.
///
/// Subsets are visited in colexicographic order, updating the face count by
/// flipping only the cells that change between consecutive subsets. With
/// `symmetry` the cap is raised to [`SYMMETRIC_CAP`] cells and the optima are
/// reduced to one canonical (smallest-bitmask) member per orbit of the
/// hyperoctahedral group of the grid.
pub fn exhaustive_min(d: usize, grid_n: usize, k: usize, symmetry: bool) -> Result<ExhaustiveResult> {
    let total = cell_count(d, grid_n)?;
    let cap = if symmetry { SYMMETRIC_CAP } else { EXHAUSTIVE_CAP };
    if total > cap {
        return Err(Error::TooLarge { what: format!("exhaustive search over {total} cells"), cap });
    }
    if k > total {
        return Err(Error::domain(format!("k = {k} exceeds the {total} cells of the grid")));
    }
    let mut v = VoxelSet::empty(d, grid_n)?;
    let mut best_faces = u64::MAX;
    let mut best: Vec<u64> = Vec::new();
    let mut examined = 0u64;
    if k == 0 {
        best_faces = 0;
        best.push(0);
        examined = 1;
    } else {
        let mut x: u64 = (1u64 << k) - 1;
        for i in 0..k {
            v.flip(i)?;
        }
        let end = 1u64 << total;
        loop {
            examined += 1;
            match v.faces.cmp(&best_faces) {
                std::cmp::Ordering::Less => {
                    best_faces = v.faces;
                    best.clear();
                    best.push(x);
                }
                std::cmp::Ordering::Equal => best.push(x),
                std::cmp::Ordering::Greater => {}
            }
            let next = next_combination(x);
            if next >= end {
                break;
            }
            let mut changed = x ^ next;
            while changed != 0 {
                let bit = changed.trailing_zeros() as usize;
                v.flip(bit)?;
                changed &= changed - 1;
            }
            x = next;
        }
    }
    if symmetry {
        let maps = symmetry_maps(d, grid_n);
        let mut reps: Vec<u64> = best.iter().map(|&m| canonical(m, &maps)).collect();
        reps.sort_unstable();
        reps.dedup();
        best = reps;
    }
    let optima: Vec<VoxelSet> = best.iter().map(|&m| VoxelSet::from_mask(d, grid_n, m)).collect();
    let face_area = (grid_n as f64).powi(1 - d as i32);
    Ok(ExhaustiveResult {
        dimension: d,
        grid_n,
        k,
        min_faces: best_faces,
        min_perimeter: best_faces as f64 * face_area,
        optima,
        symmetry_reduced: symmetry,
        subsets_examined: examined,
    })
}

/// Reference floor `√(2π)·I_γ(k/n^d) − 2d/n` for the discrete minimum; the
/// subtracted term is a discretisation allowance, not a sharp constant.
pub fn gaussian_floor(d: usize, grid_n: usize, k: usize) -> Result<f64> {
    let total = cell_count(d, grid_n)?;
    if k > total {
        return Err(Error::domain(format!("k = {k} exceeds the {total} cells of the grid")));
    }
    let lambda = k as f64 / total as f64;
    Ok(SQRT_2PI * gaussian_profile(lambda)? - 2.0 * d as f64 / grid_n as f64)
}

/// Renders the table stored in [`GOLDEN_D2_N4`] from fresh enumeration.
pub fn golden_table() -> Result<String> {
    let mut out = String::from("# k min_faces min_perimeter optima_count\n");
    for k in 1..=8 {
        let r = exhaustive_min(2, 4, k, false)?;
        writeln!(out, "{} {} {:?} {}", k, r.min_faces, r.min_perimeter, r.optima.len()).expect("string write");
    }
    Ok(out)
}

/// Compares fresh enumeration with the stored golden table.
pub fn verify_golden() -> Result<bool> {
    Ok(golden_table()? == GOLDEN_D2_N4)
}
