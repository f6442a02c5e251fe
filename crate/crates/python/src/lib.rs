//! Python bindings: states, the closed forms, the solver and the proportion
//! experiments. Errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use coherence_core::experiments::{self, ProportionReport};
use coherence_core::io::{self, StateFile};
use coherence_core::{
    closed_forms, solver, states, ComplexMatrix, DensityMatrix, Error, PureState, SampleStream,
    SolverOptions, SolverResult, C64,
};

fn value_error(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "PureState", frozen, from_py_object)]
#[derive(Clone)]
struct PyPureState(PureState);

#[pymethods]
impl PyPureState {
    #[new]
    fn new(amplitudes: Vec<C64>) -> PyResult<Self> {
        PureState::new(amplitudes).map(Self).map_err(value_error)
    }

    #[staticmethod]
    fn normalized(amplitudes: Vec<C64>) -> PyResult<Self> {
        PureState::normalized(amplitudes).map(Self).map_err(value_error)
    }

    #[staticmethod]
    fn maximally_coherent(n: usize) -> PyResult<Self> {
        PureState::maximally_coherent(n).map(Self).map_err(value_error)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<C64> {
        self.0.amplitudes().to_vec()
    }

    fn max_modulus(&self) -> f64 {
        self.0.max_modulus()
    }

    fn canonicalize(&self) -> Self {
        Self(self.0.canonicalize())
    }

    fn density(&self) -> PyDensityMatrix {
        PyDensityMatrix(self.0.density())
    }

    fn __repr__(&self) -> String {
        format!("PureState(dim={})", self.0.dim())
    }
}

#[pyclass(name = "DensityMatrix", frozen, from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix(DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    /// From a square list of rows of complex entries.
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("density matrix must be square"));
        }
        let m = ComplexMatrix::new(n, n, rows.into_iter().flatten().collect()).map_err(value_error)?;
        DensityMatrix::from_matrix(m).map(Self).map_err(value_error)
    }

    #[staticmethod]
    fn from_diagonal(weights: Vec<f64>) -> PyResult<Self> {
        DensityMatrix::from_diagonal(&weights).map(Self).map_err(value_error)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rows(&self) -> Vec<Vec<C64>> {
        let n = self.0.dim();
        (0..n).map(|i| (0..n).map(|j| self.0.entry(i, j)).collect()).collect()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }

    #[pyo3(signature = (tol = 1e-12))]
    fn is_incoherent(&self, tol: f64) -> bool {
        self.0.is_incoherent(tol)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={})", self.0.dim())
    }
}

#[pyclass(name = "SolverResult", frozen, skip_from_py_object)]
struct PySolverResult {
    #[pyo3(get)]
    value: f64,
    #[pyo3(get)]
    diagonal: Vec<f64>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    lower_bound: Option<f64>,
    #[pyo3(get)]
    converged: bool,
}

impl From<SolverResult> for PySolverResult {
    fn from(r: SolverResult) -> Self {
        Self {
            value: r.value,
            diagonal: r.diagonal,
            iterations: r.iterations,
            lower_bound: r.best_lower_bound,
            converged: r.converged,
        }
    }
}

#[pymethods]
impl PySolverResult {
    fn __repr__(&self) -> String {
        format!(
            "SolverResult(value={}, lower_bound={:?}, converged={})",
            self.value, self.lower_bound, self.converged
        )
    }
}

#[pyclass(name = "ProportionReport", frozen, skip_from_py_object)]
struct PyProportionReport {
    #[pyo3(get)]
    dim: usize,
    #[pyo3(get)]
    rank: usize,
    #[pyo3(get)]
    samples: usize,
    #[pyo3(get)]
    hits: usize,
    #[pyo3(get)]
    estimate: f64,
    #[pyo3(get)]
    ci_halfwidth: f64,
    #[pyo3(get)]
    exact: Option<f64>,
    #[pyo3(get)]
    excluded: usize,
    #[pyo3(get)]
    flagged: bool,
}

impl From<ProportionReport> for PyProportionReport {
    fn from(r: ProportionReport) -> Self {
        Self {
            flagged: r.flagged(),
            dim: r.dim,
            rank: r.rank,
            samples: r.samples,
            hits: r.hits,
            estimate: r.estimate,
            ci_halfwidth: r.ci_halfwidth,
            exact: r.exact,
            excluded: r.excluded,
        }
    }
}

#[pymethods]
impl PyProportionReport {
    fn __repr__(&self) -> String {
        format!(
            "ProportionReport(n={}, k={}, hits={}/{}, estimate={})",
            self.dim, self.rank, self.hits, self.samples, self.estimate
        )
    }
}

#[pyfunction]
#[pyo3(signature = (n, seed, index = 0))]
fn haar_pure(n: usize, seed: u64, index: u64) -> PyResult<PyPureState> {
    states::haar_pure(n, &mut SampleStream::substream(seed, index))
        .map(PyPureState)
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (n, k, seed, index = 0))]
fn random_density(n: usize, k: usize, seed: u64, index: u64) -> PyResult<PyDensityMatrix> {
    states::random_density(n, k, &mut SampleStream::substream(seed, index))
        .map(PyDensityMatrix)
        .map_err(value_error)
}

#[pyfunction]
fn l1_coherence(rho: &PyDensityMatrix) -> f64 {
    closed_forms::l1_coherence(&rho.0)
}

#[pyfunction]
fn qubit_mod_trace(rho: &PyDensityMatrix) -> PyResult<f64> {
    closed_forms::qubit_mod_trace(&rho.0).map_err(value_error)
}

#[pyfunction]
fn pure_mod_trace(x: &PyPureState) -> f64 {
    closed_forms::pure_mod_trace(&x.0)
}

/// Optimal `(p, delta)` for a pure state.
#[pyfunction]
fn pure_optimal_witness(x: &PyPureState) -> (f64, Vec<f64>) {
    let w = closed_forms::pure_optimal_witness(&x.0);
    (w.scale, w.delta.weights().to_vec())
}

/// Objective of the pure-state dual certificate after checking that it is
/// feasible.
#[pyfunction]
fn certified_lower_bound(x: &PyPureState) -> PyResult<f64> {
    let cert = closed_forms::dual_certificate_pure(&x.0).map_err(value_error)?;
    closed_forms::verify_dual(&cert, &x.0.density(), closed_forms::CERTIFICATE_TOL).map_err(value_error)
}

fn options(target_accuracy: f64, max_iterations: usize) -> SolverOptions {
    SolverOptions {
        target_accuracy,
        max_iterations,
        ..SolverOptions::default()
    }
}

#[pyfunction]
#[pyo3(signature = (rho, target_accuracy = 1e-7, max_iterations = 300))]
fn mod_trace_distance(rho: &PyDensityMatrix, target_accuracy: f64, max_iterations: usize) -> PyResult<PySolverResult> {
    solver::mod_trace_distance(&rho.0, &options(target_accuracy, max_iterations))
        .map(Into::into)
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (rho, target_accuracy = 1e-7, max_iterations = 300))]
fn trace_distance_coherence(
    rho: &PyDensityMatrix,
    target_accuracy: f64,
    max_iterations: usize,
) -> PyResult<PySolverResult> {
    solver::trace_distance_coherence(&rho.0, &options(target_accuracy, max_iterations))
        .map(Into::into)
        .map_err(value_error)
}

#[pyfunction]
fn exact_proportion(n: usize) -> PyResult<f64> {
    experiments::exact_proportion(n).map_err(value_error)
}

#[pyfunction]
fn f_density(n: usize, x: f64) -> PyResult<f64> {
    experiments::f_density(n, x).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (n, samples, seed = 42))]
fn mc_pure_proportion(n: usize, samples: usize, seed: u64) -> PyResult<PyProportionReport> {
    experiments::mc_pure_proportion(n, samples, seed)
        .map(Into::into)
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (n, k, samples, seed = 42, classification_tol = solver::CLASSIFICATION_TOL))]
fn mc_rank_proportion(
    py: Python<'_>,
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
    classification_tol: f64,
) -> PyResult<PyProportionReport> {
    py.detach(|| experiments::mc_rank_proportion(n, k, samples, seed, classification_tol))
        .map(Into::into)
        .map_err(value_error)
}

/// Parses a state file; returns a `PureState` or a `DensityMatrix`.
#[pyfunction]
fn parse_state(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    match io::parse_state(text).map_err(value_error)? {
        StateFile::Pure(x) => Ok(Py::new(py, PyPureState(x))?.into_any()),
        StateFile::Density(rho) => Ok(Py::new(py, PyDensityMatrix(rho))?.into_any()),
    }
}

#[pyfunction]
fn format_state(state: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(x) = state.cast::<PyPureState>() {
        return Ok(io::format_pure(&x.get().0));
    }
    if let Ok(rho) = state.cast::<PyDensityMatrix>() {
        return Ok(io::format_density(&rho.get().0));
    }
    Err(PyValueError::new_err("expected a PureState or DensityMatrix"))
}

#[pymodule]
fn coherence_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPureState>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PySolverResult>()?;
    m.add_class::<PyProportionReport>()?;
    m.add_function(wrap_pyfunction!(haar_pure, m)?)?;
    m.add_function(wrap_pyfunction!(random_density, m)?)?;
    m.add_function(wrap_pyfunction!(l1_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_mod_trace, m)?)?;
    m.add_function(wrap_pyfunction!(pure_mod_trace, m)?)?;
    m.add_function(wrap_pyfunction!(pure_optimal_witness, m)?)?;
    m.add_function(wrap_pyfunction!(certified_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(mod_trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(exact_proportion, m)?)?;
    m.add_function(wrap_pyfunction!(f_density, m)?)?;
    m.add_function(wrap_pyfunction!(mc_pure_proportion, m)?)?;
    m.add_function(wrap_pyfunction!(mc_rank_proportion, m)?)?;
    m.add_function(wrap_pyfunction!(parse_state, m)?)?;
    m.add_function(wrap_pyfunction!(format_state, m)?)?;
    Ok(())
}
