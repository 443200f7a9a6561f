//! Python bindings: profiles and candidates, the transport and bound
//! checks, the exhaustive oracle and the shape optimizer.
//!
//! Errors map onto Python exceptions: unsupported inputs raise
//! `NotImplementedError`, out-of-range indices `IndexError`, oversized
//! requests `MemoryError` and everything else `ValueError`.

use isocube::bounds;
use isocube::candidates::{self, AxisDirection, CandidateSpec as CoreCandidate};
use isocube::discrete::{self, VoxelSet as CoreVoxels};
use isocube::gaussian;
use isocube::optimizer::{self, InitMode, OptimizerConfig, PhaseField as CoreField};
use isocube::transport::{self, DecompositionMethod};
use isocube::{BoundReport as CoreReport, Error, ProfileCurve as CoreCurve};
use pyo3::exceptions::{PyIndexError, PyMemoryError, PyNotImplementedError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Unsupported(_) => PyNotImplementedError::new_err(msg),
        Error::IndexOutOfRange { .. } => PyIndexError::new_err(msg),
        Error::TooLarge { .. } => PyMemoryError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for isocube::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// A sampled profile `lambda -> value`.
#[pyclass(module = "isocube", frozen, skip_from_py_object)]
#[derive(Clone)]
struct ProfileCurve(CoreCurve);

#[pymethods]
impl ProfileCurve {
    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.0.lambdas().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    /// Dimension as a string: a number, or "inf" for dimension-free curves.
    #[getter]
    fn dimension(&self) -> String {
        self.0.dimension().to_string()
    }

    #[getter]
    fn provenance(&self) -> &'static str {
        self.0.provenance().as_str()
    }

    fn concavity_defect(&self) -> f64 {
        self.0.concavity_defect()
    }

    fn symmetry_defect(&self) -> f64 {
        self.0.symmetry_defect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ProfileCurve(d={}, provenance={}, points={})",
            self.0.dimension(),
            self.0.provenance().as_str(),
            self.0.len()
        )
    }
}

/// Outcome of one inequality evaluation; `margin >= 0` means it holds.
#[pyclass(module = "isocube", frozen)]
struct BoundReport(CoreReport);

#[pymethods]
impl BoundReport {
    #[getter]
    fn lhs(&self) -> f64 {
        self.0.lhs
    }

    #[getter]
    fn rhs(&self) -> f64 {
        self.0.rhs
    }

    #[getter]
    fn margin(&self) -> f64 {
        self.0.margin
    }

    #[pyo3(signature = (tol = 0.0))]
    fn holds(&self, tol: f64) -> bool {
        self.0.holds(tol)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!("BoundReport(lhs={}, rhs={}, margin={})", self.0.lhs, self.0.rhs, self.0.margin)
    }
}

/// A candidate set in the unit cube.
#[pyclass(module = "isocube", frozen, skip_from_py_object)]
#[derive(Clone)]
struct CandidateSpec(CoreCandidate);

#[pymethods]
impl CandidateSpec {
    #[staticmethod]
    #[pyo3(signature = (dimension, volume, axis = 0, positive = true))]
    fn axis_slab(dimension: usize, volume: f64, axis: usize, positive: bool) -> PyResult<Self> {
        let c = CoreCandidate::axis_slab(dimension, volume, AxisDirection { axis, positive });
        c.validate().py()?;
        Ok(Self(c))
    }

    #[staticmethod]
    fn vertex_ball(dimension: usize, volume: f64) -> PyResult<Self> {
        let c = CoreCandidate::vertex_ball(dimension, volume);
        c.validate().py()?;
        Ok(Self(c))
    }

    #[staticmethod]
    fn edge_cylinder(volume: f64) -> PyResult<Self> {
        let c = CoreCandidate::edge_cylinder(volume);
        c.validate().py()?;
        Ok(Self(c))
    }

    /// The lowest-perimeter candidate at this volume, with its perimeter.
    #[staticmethod]
    fn best(dimension: usize, volume: f64) -> PyResult<(f64, Self)> {
        let (p, c) = candidates::best_candidate(dimension, volume).py()?;
        Ok((p, Self(c)))
    }

    #[getter]
    fn family(&self) -> String {
        serde_json::to_value(self.0.family).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.0.volume
    }

    /// Cube perimeter, or None when the family is not valid at this volume.
    fn perimeter(&self) -> PyResult<Option<f64>> {
        self.0.perimeter().py()
    }

    fn contains(&self, y: Vec<f64>) -> PyResult<bool> {
        if y.len() != self.0.dimension {
            return Err(PyValueError::new_err(format!("expected {} coordinates, got {}", self.0.dimension, y.len())));
        }
        Ok(self.0.contains(&y))
    }

    fn complemented(&self) -> Self {
        Self(self.0.clone().complemented())
    }

    /// Checks the perimeter decomposition on the transported boundary.
    /// `resolution = None` uses the closed form (slabs only).
    #[pyo3(signature = (resolution = None))]
    fn decomposition_check(&self, py: Python<'_>, resolution: Option<usize>) -> PyResult<BoundReport> {
        let method = match resolution {
            None => DecompositionMethod::ClosedForm,
            Some(resolution) => DecompositionMethod::Quadrature { resolution },
        };
        let c = self.0.clone();
        py.detach(move || transport::decomposition_check(&c, method)).py().map(BoundReport)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("candidate serialises")
    }

    fn __repr__(&self) -> String {
        format!("CandidateSpec({})", self.to_json())
    }
}

/// A set of cells on the grid `{0..n-1}^d`.
#[pyclass(module = "isocube", skip_from_py_object)]
#[derive(Clone)]
struct VoxelSet(CoreVoxels);

#[pymethods]
impl VoxelSet {
    #[new]
    fn new(dimension: usize, grid_n: usize, cells: Vec<bool>) -> PyResult<Self> {
        CoreVoxels::from_cells(dimension, grid_n, cells).py().map(Self)
    }

    #[staticmethod]
    fn from_bit_matrix(dimension: usize, text: &str) -> PyResult<Self> {
        CoreVoxels::from_bit_matrix(dimension, text).py().map(Self)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    #[getter]
    fn grid_n(&self) -> usize {
        self.0.grid_n()
    }

    #[getter]
    fn cells(&self) -> Vec<bool> {
        self.0.cells().to_vec()
    }

    fn filled(&self) -> usize {
        self.0.filled()
    }

    fn face_count(&self) -> u64 {
        self.0.face_count()
    }

    fn discrete_volume(&self) -> f64 {
        self.0.discrete_volume()
    }

    fn discrete_perimeter(&self) -> f64 {
        self.0.discrete_perimeter()
    }

    /// Toggles a cell and returns the change in the face count.
    fn flip(&mut self, index: usize) -> PyResult<i64> {
        self.0.flip(index).py()
    }

    fn complement(&self) -> Self {
        Self(self.0.complement())
    }

    fn to_bit_matrix(&self) -> String {
        self.0.to_bit_matrix()
    }

    fn __repr__(&self) -> String {
        format!("VoxelSet(d={}, n={}, filled={})", self.0.dimension(), self.0.grid_n(), self.0.filled())
    }
}

/// Result of the exhaustive search for one cell count.
#[pyclass(module = "isocube", frozen, get_all)]
struct ExhaustiveResult {
    k: usize,
    min_faces: u64,
    min_perimeter: f64,
    optima: Vec<VoxelSet>,
    subsets_examined: u64,
}

/// Cell-centred field with values in [0, 1].
#[pyclass(module = "isocube", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PhaseField(CoreField);

#[pymethods]
impl PhaseField {
    #[new]
    fn new(dimension: usize, grid_n: usize, values: Vec<f64>, epsilon: f64) -> PyResult<Self> {
        CoreField::new(dimension, grid_n, values, epsilon).py().map(Self)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    #[getter]
    fn grid_n(&self) -> usize {
        self.0.grid_n()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    /// Row-major values.
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn diffuse_fraction(&self) -> f64 {
        self.0.diffuse_fraction()
    }

    fn to_voxels(&self, threshold: f64) -> PyResult<VoxelSet> {
        self.0.to_voxels(threshold).py().map(VoxelSet)
    }

    fn relaxed_energy(&self) -> f64 {
        optimizer::relaxed_energy(&self.0)
    }

    #[pyo3(signature = (sigma_cells = 4.0))]
    fn threshold_energy(&self, sigma_cells: f64) -> PyResult<f64> {
        optimizer::threshold_energy(&self.0, sigma_cells).py()
    }

    fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.0.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii dump")
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        CoreField::read_text(text.as_bytes()).py().map(Self)
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.0.write_binary(&mut buf).expect("writing to memory");
        buf
    }

    #[staticmethod]
    fn from_bytes(data: Vec<u8>) -> PyResult<Self> {
        CoreField::read_binary(data.as_slice()).py().map(Self)
    }

    fn __repr__(&self) -> String {
        format!("PhaseField(d={}, n={}, mean={})", self.0.dimension(), self.0.grid_n(), self.0.mean())
    }
}

/// Output of `minimize`.
#[pyclass(module = "isocube", frozen, get_all)]
struct Optimized {
    estimate: f64,
    error_bar: f64,
    converged: bool,
    field: PhaseField,
    /// Full diagnostics as a JSON document.
    diagnostics_json: String,
}

fn init_mode(name: &str) -> PyResult<InitMode> {
    match name {
        "slab" => Ok(InitMode::Slab),
        "corner_ball" => Ok(InitMode::CornerBall),
        "random" => Ok(InitMode::Random),
        "best_candidate" => Ok(InitMode::BestCandidate),
        other => Err(PyValueError::new_err(format!(
            "unknown init `{other}` (expected slab, corner_ball, random or best_candidate)"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn optimizer_config(
    grid_n: usize,
    init: &str,
    seed: u64,
    sigma_cells: f64,
    refine_steps: usize,
    epsilon_cells: Option<Vec<f64>>,
    step: f64,
    max_iterations: usize,
) -> PyResult<OptimizerConfig> {
    let defaults = OptimizerConfig::with_grid(grid_n);
    Ok(OptimizerConfig {
        init: init_mode(init)?,
        seed,
        sigma_cells,
        refine_steps,
        epsilon_cells: epsilon_cells.unwrap_or(defaults.epsilon_cells.clone()),
        step,
        max_iterations,
        ..defaults
    })
}

#[pyfunction]
fn lower_bound_profile(lam: f64) -> PyResult<f64> {
    candidates::lower_bound_profile(lam).py()
}

#[pyfunction]
fn gaussian_profile(lam: f64) -> PyResult<f64> {
    gaussian::gaussian_profile(lam).py()
}

#[pyfunction]
fn std_normal_quantile(p: f64) -> PyResult<f64> {
    gaussian::std_normal_quantile(p).py()
}

#[pyfunction]
fn exact_profile_2d(lam: f64) -> PyResult<f64> {
    candidates::exact_profile_2d(lam).py()
}

#[pyfunction]
fn conjectural_profile_3d(lam: f64) -> PyResult<f64> {
    candidates::conjectural_profile_3d(lam).py()
}

#[pyfunction]
fn envelope_value(d: usize, lam: f64) -> PyResult<f64> {
    candidates::envelope_value(d, lam).py()
}

#[pyfunction]
fn candidate_envelope(d: usize, lambdas: Vec<f64>) -> PyResult<ProfileCurve> {
    candidates::candidate_envelope(d, &lambdas).py().map(ProfileCurve)
}

#[pyfunction]
fn lower_bound_curve(lambdas: Vec<f64>) -> PyResult<ProfileCurve> {
    candidates::lower_bound_curve(&lambdas).py().map(ProfileCurve)
}

#[pyfunction]
fn exact_curve_2d(lambdas: Vec<f64>) -> PyResult<ProfileCurve> {
    candidates::exact_curve_2d(&lambdas).py().map(ProfileCurve)
}

#[pyfunction]
fn to_cube(x: Vec<f64>) -> Vec<f64> {
    transport::to_cube(&x)
}

#[pyfunction]
fn to_gauss(y: Vec<f64>) -> PyResult<Vec<f64>> {
    transport::to_gauss(&y).py()
}

/// Area scaling of the linear map `a` (row-major d x d) restricted to the
/// hyperplane with unit normal `nu`.
#[pyfunction]
fn restriction_jacobian(a: Vec<f64>, nu: Vec<f64>) -> PyResult<f64> {
    transport::restriction_jacobian(&a, &nu).py()
}

#[pyfunction]
fn boundary_weight(x: Vec<f64>, nu: Vec<f64>) -> PyResult<f64> {
    transport::boundary_weight(&x, &nu).py()
}

#[pyfunction]
fn pushforward_ks_test(py: Python<'_>, d: usize, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    py.detach(|| transport::pushforward_ks_test(d, n, seed)).py()
}

#[pyfunction]
fn jensen_gap(nu: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    bounds::jensen_gap(&nu, &x).py()
}

#[pyfunction]
fn cs_pointwise(u: Vec<f64>, v: Vec<f64>) -> PyResult<BoundReport> {
    bounds::cs_pointwise(&u, &v).py().map(BoundReport)
}

#[pyfunction]
fn strip_mass(ell: f64, q: f64) -> PyResult<f64> {
    bounds::strip_mass(ell, q).py()
}

/// Returns `(value, maximizer)` of the strip constant.
#[pyfunction]
fn strip_constant(ell: f64) -> PyResult<(f64, f64)> {
    bounds::strip_constant(ell).py().map(|c| (c.value, c.maximizer))
}

/// Evaluates the slicing bound for a configuration given as JSON.
#[pyfunction]
fn slicing_bound(config_json: &str) -> PyResult<BoundReport> {
    let cfg: bounds::SlicingConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(format!("bad slicing config: {e}")))?;
    bounds::slicing_bound(&cfg).py().map(BoundReport)
}

#[pyfunction]
#[pyo3(signature = (d, grid_n, k, symmetry = false))]
fn exhaustive_min(py: Python<'_>, d: usize, grid_n: usize, k: usize, symmetry: bool) -> PyResult<ExhaustiveResult> {
    let r = py.detach(|| discrete::exhaustive_min(d, grid_n, k, symmetry)).py()?;
    Ok(ExhaustiveResult {
        k: r.k,
        min_faces: r.min_faces,
        min_perimeter: r.min_perimeter,
        optima: r.optima.into_iter().map(VoxelSet).collect(),
        subsets_examined: r.subsets_examined,
    })
}

#[pyfunction]
fn gaussian_floor(d: usize, grid_n: usize, k: usize) -> PyResult<f64> {
    discrete::gaussian_floor(d, grid_n, k).py()
}

#[pyfunction]
fn verify_golden(py: Python<'_>) -> PyResult<bool> {
    py.detach(discrete::verify_golden).py()
}

#[pyfunction]
#[pyo3(signature = (
    d, lam, grid_n = 64, init = "best_candidate", seed = 0, sigma_cells = 4.0, refine_steps = 200,
    epsilon_cells = None, step = 1.0, max_iterations = 100
))]
#[allow(clippy::too_many_arguments)]
fn minimize(
    py: Python<'_>,
    d: usize,
    lam: f64,
    grid_n: usize,
    init: &str,
    seed: u64,
    sigma_cells: f64,
    refine_steps: usize,
    epsilon_cells: Option<Vec<f64>>,
    step: f64,
    max_iterations: usize,
) -> PyResult<Optimized> {
    let cfg = optimizer_config(grid_n, init, seed, sigma_cells, refine_steps, epsilon_cells, step, max_iterations)?;
    let r = py.detach(|| optimizer::minimize(d, lam, &cfg)).py()?;
    Ok(Optimized {
        estimate: r.estimate,
        error_bar: r.diagnostics.error_bar,
        converged: r.diagnostics.converged,
        field: PhaseField(r.field),
        diagnostics_json: serde_json::to_string(&r.diagnostics).expect("diagnostics serialise"),
    })
}

/// Sweeps the optimizer over `lambdas`; returns the curve of accepted points
/// and a list of `(lambda, reason)` for rejected ones.
#[pyfunction]
#[pyo3(signature = (d, lambdas, grid_n = 64, seed = 0))]
fn profile_sweep(
    py: Python<'_>,
    d: usize,
    lambdas: Vec<f64>,
    grid_n: usize,
    seed: u64,
) -> PyResult<(ProfileCurve, Vec<(f64, String)>)> {
    let cfg = OptimizerConfig { seed, ..OptimizerConfig::with_grid(grid_n) };
    let sweep = py.detach(|| optimizer::profile_sweep(d, &lambdas, &cfg)).py()?;
    Ok((ProfileCurve(sweep.curve), sweep.failures.into_iter().map(|f| (f.lambda, f.reason)).collect()))
}

#[pymodule]
#[pyo3(name = "isocube")]
fn isocube_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SQRT_2PI", isocube::SQRT_2PI)?;
    m.add_class::<ProfileCurve>()?;
    m.add_class::<BoundReport>()?;
    m.add_class::<CandidateSpec>()?;
    m.add_class::<VoxelSet>()?;
    m.add_class::<ExhaustiveResult>()?;
    m.add_class::<PhaseField>()?;
    m.add_class::<Optimized>()?;
    m.add_function(wrap_pyfunction!(lower_bound_profile, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_profile, m)?)?;
    m.add_function(wrap_pyfunction!(std_normal_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(exact_profile_2d, m)?)?;
    m.add_function(wrap_pyfunction!(conjectural_profile_3d, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_value, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_curve, m)?)?;
    m.add_function(wrap_pyfunction!(exact_curve_2d, m)?)?;
    m.add_function(wrap_pyfunction!(to_cube, m)?)?;
    m.add_function(wrap_pyfunction!(to_gauss, m)?)?;
    m.add_function(wrap_pyfunction!(restriction_jacobian, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_weight, m)?)?;
    m.add_function(wrap_pyfunction!(pushforward_ks_test, m)?)?;
    m.add_function(wrap_pyfunction!(jensen_gap, m)?)?;
    m.add_function(wrap_pyfunction!(cs_pointwise, m)?)?;
    m.add_function(wrap_pyfunction!(strip_mass, m)?)?;
    m.add_function(wrap_pyfunction!(strip_constant, m)?)?;
    m.add_function(wrap_pyfunction!(slicing_bound, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_min, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_floor, m)?)?;
    m.add_function(wrap_pyfunction!(verify_golden, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(profile_sweep, m)?)?;
    Ok(())
}
