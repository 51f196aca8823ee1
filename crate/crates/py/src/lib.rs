//! Python bindings: systems, currents, spectra and special functions.

use nhpc_core::biortho::eigenvalues;
use nhpc_core::models::{ModelSpec, ReservoirSpec};
use nhpc_core::observables::{isolated_current, persistent_current, DEFAULT_DELTA_PHI};
use nhpc_core::selfenergy::effective_hamiltonian;
use nhpc_core::{oracle, presets, specfn, NhError, Temperature, C64};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Deserialize;

fn err(e: NhError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemJson {
    model: ModelSpec,
    #[serde(default)]
    reservoirs: Vec<ReservoirSpec>,
}

/// Device plus reservoirs.
#[pyclass(frozen, skip_from_py_object, name = "System")]
#[derive(Clone)]
struct PySystem {
    inner: nhpc_core::models::System,
}

#[pymethods]
impl PySystem {
    /// System of a named figure preset.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        presets::by_name(name)
            .map(|p| PySystem { inner: p.system })
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))
    }

    /// System from JSON with keys `model` and `reservoirs`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let s: SystemJson = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = nhpc_core::models::System::new(s.model, s.reservoirs);
        inner.validate().map_err(err)?;
        Ok(PySystem { inner })
    }

    fn with_phi(&self, phi: f64) -> Self {
        PySystem { inner: self.inner.with_phi(phi) }
    }

    fn with_kappa(&self, kappa: f64) -> Self {
        PySystem { inner: self.inner.with_kappa(kappa) }
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.inner.model.phi()
    }

    #[getter]
    fn total_dim(&self) -> usize {
        self.inner.total_dim()
    }

    fn __repr__(&self) -> String {
        let kind = match self.inner.model {
            ModelSpec::Sns(_) => "sns",
            ModelSpec::Ring(_) => "ring",
        };
        format!("System({kind}, sites={}, reservoirs={}, phi={})", self.inner.model.n_sites(), self.inner.reservoirs.len(), self.phi())
    }
}

/// Names and summaries of the built-in presets.
#[pyfunction]
fn preset_names() -> Vec<(String, String)> {
    presets::all().into_iter().map(|p| (p.name.to_string(), p.summary.to_string())).collect()
}

/// Non-Hermitian persistent current at flux `phi`.
#[pyfunction]
#[pyo3(signature = (system, phi, beta=None, delta_phi=DEFAULT_DELTA_PHI))]
fn current(system: &PySystem, phi: f64, beta: Option<f64>, delta_phi: f64) -> PyResult<f64> {
    persistent_current(&system.inner, phi, Temperature::from_beta(beta), delta_phi).map_err(err)
}

/// Current from exact diagonalization with finite reservoirs.
#[pyfunction]
#[pyo3(signature = (system, phi, beta=None))]
fn exact_current(py: Python<'_>, system: &PySystem, phi: f64, beta: Option<f64>) -> PyResult<f64> {
    let s = system.inner.with_phi(phi);
    py.detach(|| oracle::exact_current(&s, Temperature::from_beta(beta))).map_err(err)
}

/// Current of the device without reservoirs.
#[pyfunction]
#[pyo3(signature = (system, phi, beta=None))]
fn isolated(system: &PySystem, phi: f64, beta: Option<f64>) -> PyResult<f64> {
    isolated_current(&system.inner.with_phi(phi).model, Temperature::from_beta(beta)).map_err(err)
}

/// Eigenvalues of the effective Hamiltonian, sorted by real then imaginary part.
#[pyfunction]
fn spectrum(system: &PySystem, phi: f64) -> PyResult<Vec<C64>> {
    let h = effective_hamiltonian(&system.inner.with_phi(phi)).map_err(err)?;
    eigenvalues(&h.matrix).map_err(err)
}

#[pyfunction]
fn log_gamma(z: C64) -> PyResult<C64> {
    specfn::log_gamma(z).map_err(err)
}

#[pyfunction]
fn digamma(z: C64) -> PyResult<C64> {
    specfn::digamma(z).map_err(err)
}

#[pymodule]
fn nhpc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(current, m)?)?;
    m.add_function(wrap_pyfunction!(exact_current, m)?)?;
    m.add_function(wrap_pyfunction!(isolated, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    Ok(())
}
