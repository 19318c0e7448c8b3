//! Python bindings for `conicscan`.
//!
//! Structured results cross the boundary as JSON and are decoded with the
//! standard `json` module, so they arrive as plain dicts and lists.

use std::sync::Arc;

use conicscan::adiabatic::{bulk_gap_window, spectral_flow_adaptive, CylinderOperator};
use conicscan::chern::{chern_number, verify_chirality_balance, ChernConfig};
use conicscan::cone::analyze_cone;
use conicscan::conventions::Conventions;
use conicscan::genericity::{remove_high_multiplicity, sard_shift_2x2, verify_all_conical};
use conicscan::hermitian::HermitianMatrix;
use conicscan::model::{builtin, builtin_names as names, Family, Model as CoreModel};
use conicscan::scan::{scan as core_scan, ScanConfig, Verdict};
use conicscan::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(pyconicscan, ConicscanError, PyException);

fn err(e: Error) -> PyErr {
    ConicscanError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| ConicscanError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A parametrized Hermitian family loaded from JSON or the built-in catalogue.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: CoreModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: builtin(name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: CoreModel::from_json_str(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: CoreModel::load(std::path::Path::new(path)).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    #[getter]
    fn band_index(&self) -> usize {
        self.inner.band_index()
    }

    #[getter]
    fn bands(&self) -> usize {
        self.inner.family().bands()
    }

    /// Eigenvalues of the family at a parameter point.
    fn eigenvalues(&self, point: [f64; 3]) -> PyResult<Vec<f64>> {
        let v = self.inner.family().evaluate(&point).eigenvalues().map_err(err)?;
        Ok(v.iter().copied().collect())
    }

    fn __repr__(&self) -> String {
        format!("Model(kind={:?}, bands={})", self.inner.kind(), self.bands())
    }
}

impl PyModel {
    fn family(&self) -> Arc<dyn Family> {
        self.inner.family()
    }

    fn band(&self, band: Option<usize>) -> usize {
        band.unwrap_or_else(|| self.inner.band_index())
    }
}

fn scan_config(grid: Option<[usize; 3]>, refine_tol: Option<f64>) -> PyResult<ScanConfig> {
    let mut cfg = ScanConfig::default();
    if let Some(g) = grid {
        cfg.grid = g;
    }
    if let Some(t) = refine_tol {
        cfg.refine_tol = t;
    }
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// Crossings of bands `band`, `band + 1`, each as a dict.
#[pyfunction]
#[pyo3(signature = (model, band=None, grid=None, refine_tol=None))]
fn scan<'py>(
    py: Python<'py>,
    model: &PyModel,
    band: Option<usize>,
    grid: Option<[usize; 3]>,
    refine_tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = scan_config(grid, refine_tol)?;
    let family = model.family();
    let n = model.band(band);
    let points = py.detach(|| core_scan(&*family, n, &cfg)).map_err(err)?;
    to_py(py, &points)
}

/// Cone data (frame, linearization, chirality) of every conical crossing.
#[pyfunction]
#[pyo3(signature = (model, band=None, grid=None))]
fn classify<'py>(
    py: Python<'py>,
    model: &PyModel,
    band: Option<usize>,
    grid: Option<[usize; 3]>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = scan_config(grid, None)?;
    let family = model.family();
    let n = model.band(band);
    let cones = py
        .detach(|| {
            core_scan(&*family, n, &cfg)?
                .iter()
                .filter(|p| p.verdict == Verdict::Conical)
                .map(|p| analyze_cone(&*family, p))
                .collect::<conicscan::Result<Vec<_>>>()
        })
        .map_err(err)?;
    to_py(py, &cones)
}

/// First Chern number of the slice at `s`.
#[pyfunction]
#[pyo3(signature = (model, s, band=None))]
fn chern<'py>(py: Python<'py>, model: &PyModel, s: f64, band: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let family = model.family();
    let n = model.band(band);
    let est = py
        .detach(|| chern_number(&*family, s, n, &ChernConfig::default()))
        .map_err(err)?;
    to_py(py, &est)
}

/// Chern jumps against chirality sums along a homotopy.
#[pyfunction]
#[pyo3(signature = (model, band=None))]
fn chirality_balance<'py>(py: Python<'py>, model: &PyModel, band: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let family = model.family();
    let n = model.band(band);
    let (_, report) = py
        .detach(|| verify_chirality_balance(&*family, n, &ScanConfig::default(), &ChernConfig::default()))
        .map_err(err)?;
    to_py(py, &report)
}

/// Signed count of chiral wall modes for a homotopy model.
#[pyfunction]
#[pyo3(signature = (model, delta=0.05, width=40, k1=64))]
fn spectral_flow<'py>(
    py: Python<'py>,
    model: &PyModel,
    delta: f64,
    width: usize,
    k1: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let CoreModel::Homotopy(h) = &model.inner else {
        return Err(ConicscanError::new_err("spectral flow needs a homotopy model"));
    };
    let h = h.clone();
    let report = py
        .detach(|| {
            let gap = bulk_gap_window(&h, 64)?;
            let cyl = CylinderOperator::new(h, delta, width, k1)?;
            spectral_flow_adaptive(&cyl, gap.center(), gap.default_half_width(), 3)
        })
        .map_err(err)?;
    to_py(py, &report)
}

/// Constant perturbation (`"shift"` or `"pauli"`) followed by a conicality check.
#[pyfunction]
#[pyo3(signature = (model, kind="shift", eps=1e-2, seed=0, band=None))]
fn perturb<'py>(
    py: Python<'py>,
    model: &PyModel,
    kind: &str,
    eps: f64,
    seed: u64,
    band: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let family = model.family();
    let n = model.band(band);
    let cfg = ScanConfig::default();
    let (result, check) = py
        .detach(|| {
            let (r, f) = match kind {
                "shift" => remove_high_multiplicity(family, n, eps, seed, &cfg)?,
                "pauli" => sard_shift_2x2(family, n, eps, seed, &cfg)?,
                other => return Err(Error::Input(format!("unknown perturbation kind {other:?}"))),
            };
            Ok((r, verify_all_conical(&f, n, &cfg)?))
        })
        .map_err(err)?;
    let out = serde_json::json!({ "perturbation": result, "verification": check });
    to_py(py, &out)
}

/// Product of squared eigenvalue differences of a Hermitian matrix given as real and imaginary parts.
#[pyfunction]
fn discriminant(re: Vec<Vec<f64>>, im: Vec<Vec<f64>>) -> PyResult<f64> {
    let m = HermitianMatrix::from_parts(&re, &im).map_err(err)?;
    conicscan::discriminant(&m).map_err(err)
}

/// Eigenvalues of `v . sigma`.
#[pyfunction]
fn pauli_eigenvalues(v: [f64; 3]) -> PyResult<Vec<f64>> {
    let m = HermitianMatrix::from_pauli(v);
    Ok(m.eigenvalues().map_err(err)?.iter().copied().collect())
}

#[pyfunction]
fn builtin_names() -> Vec<(&'static str, &'static str)> {
    names()
}

#[pyfunction]
fn conventions(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &Conventions::current())
}

#[pymodule]
fn pyconicscan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConicscanError", m.py().get_type::<ConicscanError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(chern, m)?)?;
    m.add_function(wrap_pyfunction!(chirality_balance, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_flow, m)?)?;
    m.add_function(wrap_pyfunction!(perturb, m)?)?;
    m.add_function(wrap_pyfunction!(discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(conventions, m)?)?;
    Ok(())
}
