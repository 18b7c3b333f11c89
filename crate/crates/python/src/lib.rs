// SPDX-License-Identifier: Apache-2.0

//! Python bindings. Matrices cross the boundary as nested lists of
//! complex numbers.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use fockdecay::channel;
use fockdecay::linalg::CMatrix;
use fockdecay::master::default_step;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

fn err(e: fockdecay::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// One particle species.
#[pyclass(name = "Mode", from_py_object)]
#[derive(Clone)]
struct PyMode {
    inner: fockdecay::ModeSpec,
}

#[pymethods]
impl PyMode {
    #[new]
    #[pyo3(signature = (statistics, mass, width, cutoff = fockdecay::fock::DEFAULT_BOSON_CUTOFF))]
    fn new(statistics: &str, mass: f64, width: f64, cutoff: usize) -> PyResult<Self> {
        let spec = match statistics {
            "boson" => fockdecay::ModeSpec::boson(mass, width).with_cutoff(cutoff),
            "fermion" => fockdecay::ModeSpec::fermion(mass, width),
            other => return Err(PyValueError::new_err(format!("unknown statistics '{other}'"))),
        };
        Ok(Self { inner: spec })
    }

    #[getter]
    fn cutoff(&self) -> usize {
        self.inner.cutoff
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    #[getter]
    fn width(&self) -> f64 {
        self.inner.width
    }
}

/// Truncated multi-mode Fock space.
#[pyclass(name = "FockSpace", frozen)]
struct PyFockSpace {
    inner: Arc<fockdecay::FockSpace>,
}

#[pymethods]
impl PyFockSpace {
    #[new]
    fn new(modes: Vec<PyMode>) -> PyResult<Self> {
        let inner = fockdecay::FockSpace::new(modes.into_iter().map(|m| m.inner).collect()).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn mode_count(&self) -> usize {
        self.inner.mode_count()
    }

    fn index_of(&self, occupations: Vec<usize>) -> PyResult<usize> {
        self.inner.index_of(&occupations).map_err(err)
    }

    fn occupations(&self, index: usize) -> PyResult<Vec<usize>> {
        if index >= self.inner.dimension() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.occupations(index))
    }
}

/// Density matrix on a Fock space.
#[pyclass(name = "DensityOperator", frozen)]
struct PyDensity {
    inner: fockdecay::DensityOperator,
}

#[pymethods]
impl PyDensity {
    fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.matrix())
    }

    /// Diagonal keyed by occupation tuple.
    fn occupation_distribution<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for (occ, p) in fockdecay::occupation_distribution(&self.inner) {
            out.set_item(PyTuple::new(py, occ)?, p)?;
        }
        Ok(out)
    }

    fn expectation(&self, observable: &PyOperator) -> PyResult<f64> {
        fockdecay::expectation(&self.inner, &observable.inner).map_err(err)
    }
}

/// Operator matrix on a Fock space.
#[pyclass(name = "Operator", frozen)]
struct PyOperator {
    inner: fockdecay::OperatorMatrix,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(space: &PyFockSpace, rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let m = from_rows(rows)?;
        Ok(Self {
            inner: fockdecay::OperatorMatrix::new(space.inner.clone(), m).map_err(err)?,
        })
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.matrix())
    }

    fn dagger(&self) -> Self {
        Self {
            inner: self.inner.dagger(),
        }
    }
}

/// Mixing rotation angles; stored reduced into [0, 2π).
#[pyclass(name = "MixingParams", frozen)]
struct PyMixing {
    inner: fockdecay::MixingParams,
}

#[pymethods]
impl PyMixing {
    #[new]
    #[pyo3(signature = (theta, phi, psi = 0.0, chi = 0.0))]
    fn new(theta: f64, phi: f64, psi: f64, chi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: fockdecay::MixingParams::new(theta, phi, psi, chi).map_err(err)?,
        })
    }

    #[getter]
    fn angles(&self) -> (f64, f64, f64, f64) {
        let p = self.inner;
        (p.theta, p.phi, p.psi, p.chi)
    }

    fn mixing_matrix(&self) -> Vec<Vec<Complex64>> {
        to_rows(&self.inner.mixing_matrix())
    }
}

/// Decay model: Hamiltonian, Lindblad operators and the non-Hermitian
/// effective Hamiltonian.
#[pyclass(name = "DecayModel", frozen)]
struct PyModel {
    inner: fockdecay::DecayModel,
}

fn states(v: Vec<fockdecay::DensityOperator>) -> Vec<PyDensity> {
    v.into_iter().map(|inner| PyDensity { inner }).collect()
}

#[pymethods]
impl PyModel {
    /// Each mode decays independently with its own mass and width.
    #[staticmethod]
    fn unmixed(space: &PyFockSpace) -> PyResult<Self> {
        Ok(Self {
            inner: fockdecay::DecayModel::unmixed(&space.inner).map_err(err)?,
        })
    }

    /// Two flavours rotated into propagation modes.
    #[staticmethod]
    fn mixed(space: &PyFockSpace, params: &PyMixing, masses: (f64, f64), widths: (f64, f64)) -> PyResult<Self> {
        Ok(Self {
            inner: fockdecay::build_mixed_model(&space.inner, params.inner, masses, widths).map_err(err)?,
        })
    }

    fn evolve_state(&self, rho: &PyDensity, times: Vec<f64>) -> PyResult<Vec<PyDensity>> {
        fockdecay::evolve_state(&self.inner, &rho.inner, &times)
            .map(states)
            .map_err(err)
    }

    /// Runge–Kutta integration; every time must be a multiple of `step`.
    #[pyo3(signature = (rho, times, step = None))]
    fn integrate(&self, rho: &PyDensity, times: Vec<f64>, step: Option<f64>) -> PyResult<Vec<PyDensity>> {
        let step = step.unwrap_or_else(|| default_step(&self.inner));
        let gen = fockdecay::GeneratorAction::new(&self.inner);
        fockdecay::integrate(&gen, &rho.inner, &times, step)
            .map(states)
            .map_err(err)
    }

    fn evolve_observable(&self, observable: &PyOperator, t: f64) -> PyResult<PyOperator> {
        let map = fockdecay::HeisenbergMap::new(&self.inner, t).map_err(err)?;
        let inner = fockdecay::evolve_observable(&map, &observable.inner).map_err(err)?;
        Ok(PyOperator { inner })
    }

    fn kraus_completeness_defect(&self, t: f64, k_max: usize) -> PyResult<f64> {
        channel::build_kraus(&self.inner, t, k_max)
            .map(|k| k.completeness_defect())
            .map_err(err)
    }

    fn mean_number_trajectory(&self, rho: &PyDensity, times: Vec<f64>) -> PyResult<Vec<f64>> {
        fockdecay::mean_number_trajectory(&self.inner, &rho.inner, &times).map_err(err)
    }

    fn mean_strangeness_trajectory(&self, rho: &PyDensity, times: Vec<f64>) -> PyResult<Vec<f64>> {
        fockdecay::mean_strangeness_trajectory(&self.inner, &rho.inner, &times).map_err(err)
    }
}

#[pyfunction]
fn number_state(space: &PyFockSpace, occupations: Vec<usize>) -> PyResult<PyDensity> {
    let inner = fockdecay::number_state(&space.inner, &occupations).map_err(err)?;
    Ok(PyDensity { inner })
}

#[pyfunction]
fn number_mixture(space: &PyFockSpace, parts: Vec<(f64, Vec<usize>)>) -> PyResult<PyDensity> {
    let inner = fockdecay::number_mixture(&space.inner, &parts).map_err(err)?;
    Ok(PyDensity { inner })
}

#[pyfunction]
fn coherent_state(space: &PyFockSpace, mode: usize, alpha: Complex64) -> PyResult<PyDensity> {
    let inner = fockdecay::coherent_state(&space.inner, mode, alpha).map_err(err)?;
    Ok(PyDensity { inner })
}

#[pyfunction]
fn poisson_mixture(space: &PyFockSpace, mode: usize, nbar: f64) -> PyResult<PyDensity> {
    let inner = fockdecay::poisson_mixture(&space.inner, mode, nbar).map_err(err)?;
    Ok(PyDensity { inner })
}

#[pyfunction]
fn number_operator(space: &PyFockSpace, mode: usize) -> PyResult<PyOperator> {
    let inner = fockdecay::build_number(&space.inner, mode).map_err(err)?;
    Ok(PyOperator { inner })
}

#[pyfunction]
fn total_number(space: &PyFockSpace) -> PyOperator {
    PyOperator {
        inner: fockdecay::build_total_number(&space.inner),
    }
}

#[pyfunction]
fn annihilator(space: &PyFockSpace, mode: usize) -> PyResult<PyOperator> {
    let inner = fockdecay::build_annihilator(&space.inner, mode).map_err(err)?;
    Ok(PyOperator { inner })
}

#[pyfunction]
fn projector(space: &PyFockSpace, occupations: Vec<usize>) -> PyResult<PyOperator> {
    let inner = fockdecay::build_projector(&space.inner, &occupations).map_err(err)?;
    Ok(PyOperator { inner })
}

/// N, S, Qplus and Qminus for a two-mode space.
#[pyfunction]
fn flavour_observables(space: &PyFockSpace, phi: f64) -> PyResult<BTreeMap<&'static str, PyOperator>> {
    let f = fockdecay::build_flavour_observables(&space.inner, phi).map_err(err)?;
    Ok(BTreeMap::from([
        ("N", PyOperator { inner: f.number }),
        ("S", PyOperator { inner: f.strangeness }),
        ("Qplus", PyOperator { inner: f.q_plus }),
        ("Qminus", PyOperator { inner: f.q_minus }),
    ]))
}

/// Parses and validates a scenario document; raises ValueError with the
/// error code and path on failure.
#[pyfunction]
fn validate_config(text: &str) -> PyResult<()> {
    fockdecay::parse_config(text)
        .map(|_| ())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a scenario document and returns the written file paths.
#[pyfunction]
#[pyo3(signature = (text, out_dir = None))]
fn run_config(text: &str, out_dir: Option<PathBuf>) -> PyResult<Vec<PathBuf>> {
    let cfg = fockdecay::parse_config(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let opts = fockdecay::RunOptions {
        out_dir,
        ..Default::default()
    };
    match fockdecay::run_scenario(&cfg, &opts) {
        Ok(r) => Ok(r.files),
        Err(fockdecay::RunError::Config(e)) => Err(PyValueError::new_err(e.to_string())),
        Err(e) => Err(PyRuntimeError::new_err(e.to_string())),
    }
}

#[pymodule]
pub fn pyfockdecay(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMode>()?;
    m.add_class::<PyFockSpace>()?;
    m.add_class::<PyDensity>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyMixing>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(number_state, m)?)?;
    m.add_function(wrap_pyfunction!(number_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_state, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(number_operator, m)?)?;
    m.add_function(wrap_pyfunction!(total_number, m)?)?;
    m.add_function(wrap_pyfunction!(annihilator, m)?)?;
    m.add_function(wrap_pyfunction!(projector, m)?)?;
    m.add_function(wrap_pyfunction!(flavour_observables, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
