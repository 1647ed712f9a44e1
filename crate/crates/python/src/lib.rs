use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sharp_poincare::extremizers::{f_r, f_r_norm_p, g_r1, v_r_iterates, ExtremizerParams};
use sharp_poincare::geometry;
use sharp_poincare::rearrangement::{hardy_check, hardy_power_family};
use sharp_poincare::selfcheck::{run_selfcheck, SelfCheckOptions};
use sharp_poincare::variational::{self, Candidate};
use sharp_poincare::Error;

create_exception!(sharp_poincare_py, NumericalError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain { .. } | Error::InfeasibleGrid { .. } | Error::NoThreshold { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => NumericalError::new_err(other.to_string()),
    }
}

#[pyclass(name = "SpaceParams", frozen)]
struct PySpaceParams {
    inner: geometry::SpaceParams,
}

#[pymethods]
impl PySpaceParams {
    #[new]
    fn new(n: u32) -> PyResult<Self> {
        Ok(Self {
            inner: geometry::SpaceParams::new(n).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn omega_n(&self) -> f64 {
        self.inner.omega_n()
    }

    fn ball_volume(&self, rho: f64) -> PyResult<f64> {
        geometry::ball_volume(rho, &self.inner).map_err(to_py)
    }

    fn inverse_volume(&self, s: f64) -> PyResult<f64> {
        geometry::inverse_volume(s, &self.inner).map_err(to_py)
    }

    fn surface_measure(&self, s: f64) -> PyResult<f64> {
        geometry::surface_measure(s, &self.inner).map_err(to_py)
    }

    fn surface_ratio(&self, s: f64) -> PyResult<f64> {
        geometry::surface_ratio(s, &self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("SpaceParams(n={})", self.inner.n())
    }
}

#[pyclass(name = "PoincareParams", frozen)]
struct PyPoincareParams {
    inner: variational::PoincareParams,
}

#[pymethods]
impl PyPoincareParams {
    #[new]
    fn new(n: u32, m: u32, p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: variational::PoincareParams::new(n, m, p).map_err(to_py)?,
        })
    }

    #[getter]
    fn constant(&self) -> f64 {
        self.inner.constant()
    }

    #[getter]
    fn p_conj(&self) -> f64 {
        self.inner.p_conj()
    }

    #[getter]
    fn is_even(&self) -> bool {
        self.inner.is_even()
    }

    fn corollary_constant(&self, l: u32) -> PyResult<f64> {
        self.inner.corollary_constant(l).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "PoincareParams(n={}, m={}, p={})",
            self.inner.n(),
            self.inner.m(),
            self.inner.p()
        )
    }
}

/// The extremizing profile `f_R` in the volume coordinate.
#[pyclass(name = "Extremizer", frozen)]
struct PyExtremizer {
    inner: ExtremizerParams,
}

#[pymethods]
impl PyExtremizer {
    #[new]
    #[pyo3(signature = (n, p, eps, log_ratio))]
    fn new(n: u32, p: f64, eps: f64, log_ratio: f64) -> PyResult<Self> {
        let sp = geometry::SpaceParams::new(n).map_err(to_py)?;
        Ok(Self {
            inner: ExtremizerParams::new(&sp, p, eps, log_ratio).map_err(to_py)?,
        })
    }

    #[getter]
    fn s0(&self) -> f64 {
        self.inner.s0()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }

    fn f_r(&self, s: Vec<f64>) -> Vec<f64> {
        let f = f_r(&self.inner);
        s.into_iter().map(|x| f.value(x)).collect()
    }

    fn g_r1(&self, s: Vec<f64>) -> PyResult<Vec<f64>> {
        s.into_iter().map(|x| g_r1(&self.inner, x).map_err(to_py)).collect()
    }

    /// `∫ f_R^p ds`
    fn norm_p(&self) -> f64 {
        f_r_norm_p(&self.inner)
    }

    /// `T^k f_R` sampled at `s`, on the default grid.
    fn iterate(&self, py: Python<'_>, k: usize, s: Vec<f64>) -> PyResult<Vec<f64>> {
        let params = self.inner.clone();
        let v = py
            .detach(move || {
                let grid = params.default_grid()?;
                v_r_iterates(&params, k, &grid)
            })
            .map_err(to_py)?;
        let last = v.last().ok_or_else(|| PyValueError::new_err("k must be at least 1"))?;
        Ok(s.into_iter().map(|x| last.value(x)).collect())
    }
}

#[pyclass(name = "TestFunction", frozen)]
struct PyTestFunction {
    inner: variational::TestFunction,
}

#[pymethods]
impl PyTestFunction {
    #[new]
    fn new(coeffs: Vec<f64>, alpha: f64) -> PyResult<Self> {
        Ok(Self {
            inner: variational::TestFunction::new(coeffs, alpha).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn family(seed: u64, count: usize, n: u32, p: f64) -> Vec<Self> {
        variational::TestFunction::family(seed, count, n, p)
            .into_iter()
            .map(|inner| Self { inner })
            .collect()
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn __call__(&self, rho: f64) -> f64 {
        use geometry::RadialFunction;
        self.inner.value(rho)
    }

    fn derivative_norm(&self, order: u32, p: f64, n: u32) -> PyResult<f64> {
        let sp = geometry::SpaceParams::new(n).map_err(to_py)?;
        self.inner.derivative_norm(order, p, &sp).map_err(to_py)
    }

    fn rayleigh_quotient(&self, m: u32, p: f64, n: u32) -> PyResult<f64> {
        let sp = geometry::SpaceParams::new(n).map_err(to_py)?;
        variational::rayleigh_quotient(Candidate::Test(&self.inner), m, p, &sp).map_err(to_py)
    }
}

#[pyfunction]
fn constant(n: u32, m: u32, p: f64) -> PyResult<f64> {
    variational::constant(n, m, p).map_err(to_py)
}

#[pyfunction]
fn ball_volume(rho: f64, n: u32) -> PyResult<f64> {
    PySpaceParams::new(n)?.ball_volume(rho)
}

#[pyfunction]
fn inverse_volume(s: f64, n: u32) -> PyResult<f64> {
    PySpaceParams::new(n)?.inverse_volume(s)
}

#[pyfunction]
fn surface_measure(s: f64, n: u32) -> PyResult<f64> {
    PySpaceParams::new(n)?.surface_measure(s)
}

/// Rows of `(R, ln(R/s0), quotient, quotient/C)` plus the fitted limit.
#[pyfunction]
fn sharpness_sweep<'py>(
    py: Python<'py>,
    n: u32,
    m: u32,
    p: f64,
    eps: f64,
    log_ratios: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let table = py
        .detach(|| variational::sharpness_sweep(n, m, p, eps, &log_ratios))
        .map_err(to_py)?;
    let rows: Vec<(f64, f64, f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r.r, r.log_ratio, r.quotient, r.quotient_over_c))
        .collect();
    let out = PyDict::new(py);
    out.set_item("s0", table.s0)?;
    out.set_item("constant", table.constant)?;
    out.set_item("rows", rows)?;
    out.set_item("extrapolated", table.extrapolated)?;
    Ok(out)
}

/// `(lhs, rhs, margin, holds)` per seeded test function.
#[pyfunction]
#[pyo3(signature = (n, m, p, count = 50, seed = 1))]
fn verify_inequality(n: u32, m: u32, p: f64, count: usize, seed: u64) -> PyResult<Vec<(f64, f64, f64, bool)>> {
    let sp = geometry::SpaceParams::new(n).map_err(to_py)?;
    variational::TestFunction::family(seed, count, n, p)
        .iter()
        .map(|u| {
            let r = variational::check_inequality(Candidate::Test(u), m, p, &sp).map_err(to_py)?;
            Ok((r.lhs, r.rhs, r.margin, r.holds))
        })
        .collect()
}

/// `(lhs, rhs, ratio, holds)` for the truncated power law.
#[pyfunction]
fn hardy(p: f64, log_truncation: f64) -> PyResult<(f64, f64, f64, bool)> {
    let r = hardy_power_family(p, log_truncation)
        .and_then(|v| hardy_check(&v, p))
        .map_err(to_py)?;
    Ok((r.lhs, r.rhs, r.ratio(), r.holds))
}

/// Suite name to `(passed, worst, tolerance)`.
#[pyfunction]
#[pyo3(signature = (seed = 1))]
fn selfcheck<'py>(py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let report = py.detach(|| {
        run_selfcheck(&SelfCheckOptions {
            seed,
            ..Default::default()
        })
    });
    let out = PyDict::new(py);
    for s in &report.suites {
        out.set_item(s.name, (s.passed, s.worst, s.tolerance))?;
    }
    Ok(out)
}

#[pymodule]
fn sharp_poincare_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PySpaceParams>()?;
    m.add_class::<PyPoincareParams>()?;
    m.add_class::<PyExtremizer>()?;
    m.add_class::<PyTestFunction>()?;
    m.add_function(wrap_pyfunction!(constant, m)?)?;
    m.add_function(wrap_pyfunction!(ball_volume, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_volume, m)?)?;
    m.add_function(wrap_pyfunction!(surface_measure, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify_inequality, m)?)?;
    m.add_function(wrap_pyfunction!(hardy, m)?)?;
    m.add_function(wrap_pyfunction!(selfcheck, m)?)?;
    Ok(())
}
