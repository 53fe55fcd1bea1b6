//! Python bindings. Fields are opaque `Field` objects; traces come back as
//! plain lists inside dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kvinverse::continuation::march_global;
use kvinverse::forward::{run_direct as direct, synthesize_twin, Advection, MeasurementTrace, ModelParams};
use kvinverse::inverse::{check_assumptions as check, fixed_point_solve as solve, FixedPointConfig, ProblemSetup};
use kvinverse::memory::{relative_l2_error, KernelSpec, PhysicalParams};
use kvinverse::{Error, Grid, SpectralField};

create_exception!(kvinverse_py, AssumptionError, PyValueError);
create_exception!(kvinverse_py, NotConvergedError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Assumption(_) | Error::AlphaFloor { .. } => AssumptionError::new_err(e.to_string()),
        Error::Diverged { .. } => NotConvergedError::new_err(e.to_string()),
        Error::Io(_) | Error::Csv(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Divergence-free velocity field on a periodic box.
#[pyclass(name = "Field", module = "kvinverse_py", skip_from_py_object)]
struct PyField {
    inner: SpectralField,
}

#[pymethods]
impl PyField {
    /// Named preset (`shear`, `taylor_green`, `mixed`, `probe`, `cellular`, `abc`, `zero`).
    #[staticmethod]
    #[pyo3(signature = (dim, n, name, amplitude = 1.0))]
    fn preset(dim: usize, n: usize, name: &str, amplitude: f64) -> PyResult<Self> {
        let grid = Grid::new(dim, n).map_err(to_py)?;
        let inner = kvinverse::presets::preset(&grid, name, amplitude).map_err(to_py)?;
        Ok(PyField { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.grid().dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.grid().modes_per_axis()
    }

    /// Nodal values as `[component][flat index]`, last axis fastest.
    fn to_physical(&self) -> Vec<Vec<f64>> {
        self.inner.to_physical()
    }

    fn sobolev_norm(&self, s: f64) -> f64 {
        self.inner.sobolev_norm(s)
    }

    fn max_divergence(&self) -> f64 {
        self.inner.max_divergence()
    }

    fn leray_project(&self) -> Self {
        PyField {
            inner: self.inner.leray_project(),
        }
    }

    fn laplacian(&self) -> Self {
        PyField {
            inner: self.inner.laplacian(),
        }
    }

    fn scaled(&self, a: f64) -> Self {
        PyField {
            inner: self.inner.scaled(a),
        }
    }

    fn inner(&self, other: &PyField) -> f64 {
        self.inner.l2_inner(&other.inner)
    }

    fn __add__(&self, other: &PyField) -> PyResult<Self> {
        self.inner.ensure_same_grid(&other.inner).map_err(to_py)?;
        Ok(PyField {
            inner: &self.inner + &other.inner,
        })
    }

    fn __repr__(&self) -> String {
        format!("Field(dim={}, n={}, l2={:.6e})", self.dim(), self.n(), self.inner.sobolev_norm(0.0))
    }
}

/// `(mu0, mu1, gamma, delta)` from the relaxation and retardation times.
#[pyfunction]
#[pyo3(name = "physical_params")]
fn physical(lambda: f64, kappa1: f64, kappa2: f64, nu: f64) -> PyResult<(f64, f64, f64, f64)> {
    let p = PhysicalParams {
        lambda,
        kappa1,
        kappa2,
        nu,
    };
    p.validate().map_err(to_py)?;
    Ok((p.mu0(), p.mu1(), p.gamma(), p.delta()))
}

fn params(mu0: f64, mu1: f64, gamma: Option<f64>, delta: Option<f64>, u_inf: Option<&PyField>) -> PyResult<ModelParams> {
    let kernel = match (gamma, delta) {
        (Some(gamma), Some(delta)) => KernelSpec::Exponential { gamma, delta },
        (None, None) => KernelSpec::Zero,
        _ => return Err(PyValueError::new_err("give both gamma and delta, or neither")),
    };
    let advection = match u_inf {
        Some(w) => Advection::Oseen(w.inner.clone()),
        None => Advection::Nonlinear,
    };
    ModelParams::new(mu0, mu1, kernel, advection).map_err(to_py)
}

fn solver(tau: f64, dt: f64, tol: f64, max_iter: usize, enforce_smallness: bool) -> FixedPointConfig {
    FixedPointConfig {
        tol,
        max_iter,
        enforce_smallness,
        ..FixedPointConfig::new(tau, dt)
    }
}

/// Direct problem; returns `t`, `r`, `rp`, `rpp`, `kernel` and the final field.
#[pyfunction]
#[pyo3(signature = (u0, phi, mu0, mu1, t_end, dt, gamma = None, delta = None, u_inf = None))]
#[allow(clippy::too_many_arguments)]
fn run_direct<'py>(
    py: Python<'py>,
    u0: &PyField,
    phi: &PyField,
    mu0: f64,
    mu1: f64,
    t_end: f64,
    dt: f64,
    gamma: Option<f64>,
    delta: Option<f64>,
    u_inf: Option<&PyField>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params(mu0, mu1, gamma, delta, u_inf)?;
    let run = direct(&u0.inner, &p, t_end, dt, &phi.inner).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("t", run.measurement.times())?;
    out.set_item("r", run.measurement.r.clone())?;
    out.set_item("rp", run.measurement.r1.clone())?;
    out.set_item("rpp", run.measurement.r2.clone())?;
    out.set_item("kernel", run.kernel.samples().to_vec())?;
    out.set_item(
        "u_final",
        PyField {
            inner: run.u.last().clone(),
        },
    )?;
    Ok(out)
}

/// Synthesize data with an exponential kernel and reconstruct it on `[0, tau]`.
#[pyfunction]
#[pyo3(signature = (u0, phi, mu0, mu1, gamma, delta, tau, dt, u_inf = None, refinement = 1, tol = 1e-8, max_iter = 50, enforce_smallness = false))]
#[allow(clippy::too_many_arguments)]
fn twin<'py>(
    py: Python<'py>,
    u0: &PyField,
    phi: &PyField,
    mu0: f64,
    mu1: f64,
    gamma: f64,
    delta: f64,
    tau: f64,
    dt: f64,
    u_inf: Option<&PyField>,
    refinement: usize,
    tol: f64,
    max_iter: usize,
    enforce_smallness: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params(mu0, mu1, Some(gamma), Some(delta), u_inf)?;
    let data = synthesize_twin(&u0.inner, &phi.inner, &p, tau, dt, refinement).map_err(to_py)?;
    let setup = ProblemSetup::new(p, u0.inner.clone(), phi.inner.clone(), data.measurement).map_err(to_py)?;
    let res = solve(&setup, &solver(tau, dt, tol, max_iter, enforce_smallness)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("relative_error", relative_l2_error(&res.k, &data.k_true).map_err(to_py)?)?;
    out.set_item("k_true", data.k_true.samples().to_vec())?;
    fill_solution(&out, &res)?;
    Ok(out)
}

fn fill_solution(out: &Bound<'_, PyDict>, res: &kvinverse::inverse::FixedPointResult) -> PyResult<()> {
    out.set_item("k", res.k.samples().to_vec())?;
    out.set_item("t", res.k.times())?;
    out.set_item("converged", res.converged)?;
    out.set_item("iterations", res.iterations)?;
    out.set_item("contraction_ratios", res.contraction_ratios.clone())?;
    out.set_item("tau", res.tau)?;
    out.set_item("restarts", res.restarts)?;
    if let Some(r) = &res.residuals {
        out.set_item("overdetermination", r.overdetermination)?;
        out.set_item("momentum_relative", r.momentum_relative)?;
    }
    Ok(())
}

fn measured_setup(
    u0: &PyField,
    phi: &PyField,
    p: ModelParams,
    dt: f64,
    r: Vec<f64>,
    rp: Vec<f64>,
    rpp: Vec<f64>,
) -> PyResult<ProblemSetup> {
    let m = MeasurementTrace::new(dt, r, rp, rpp).map_err(to_py)?;
    ProblemSetup::new(p, u0.inner.clone(), phi.inner.clone(), m).map_err(to_py)
}

/// Reconstruct kernel and velocity on `[0, tau]` from `r`, `r'`, `r''`.
#[pyfunction]
#[pyo3(signature = (u0, phi, mu0, mu1, dt, r, rp, rpp, tau, u_inf = None, tol = 1e-8, max_iter = 50, enforce_smallness = false))]
#[allow(clippy::too_many_arguments)]
fn fixed_point_solve<'py>(
    py: Python<'py>,
    u0: &PyField,
    phi: &PyField,
    mu0: f64,
    mu1: f64,
    dt: f64,
    r: Vec<f64>,
    rp: Vec<f64>,
    rpp: Vec<f64>,
    tau: f64,
    u_inf: Option<&PyField>,
    tol: f64,
    max_iter: usize,
    enforce_smallness: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let setup = measured_setup(u0, phi, params(mu0, mu1, None, None, u_inf)?, dt, r, rp, rpp)?;
    let res = solve(&setup, &solver(tau, dt, tol, max_iter, enforce_smallness)).map_err(to_py)?;
    let out = PyDict::new(py);
    fill_solution(&out, &res)?;
    Ok(out)
}

/// Window-by-window reconstruction over `[0, t_end]`.
#[pyfunction]
#[pyo3(signature = (u0, phi, mu0, mu1, dt, r, rp, rpp, tau, t_end, u_inf = None, tol = 1e-8, max_iter = 50))]
#[allow(clippy::too_many_arguments)]
fn march<'py>(
    py: Python<'py>,
    u0: &PyField,
    phi: &PyField,
    mu0: f64,
    mu1: f64,
    dt: f64,
    r: Vec<f64>,
    rp: Vec<f64>,
    rpp: Vec<f64>,
    tau: f64,
    t_end: f64,
    u_inf: Option<&PyField>,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let setup = measured_setup(u0, phi, params(mu0, mu1, None, None, u_inf)?, dt, r, rp, rpp)?;
    let res = march_global(&setup, &solver(tau, dt, tol, max_iter, false), t_end, None).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("k", res.k.samples().to_vec())?;
    out.set_item("t", res.k.times())?;
    out.set_item("completed", res.completed)?;
    out.set_item("failure", res.failure.clone())?;
    out.set_item("experimental", res.experimental)?;
    out.set_item("windows", res.windows.len())?;
    out.set_item("monitor_ratio", res.monitor_ratio())?;
    out.set_item("max_junction_jump", res.max_junction_jump())?;
    Ok(out)
}

/// Assumption report as a list of `(name, passed, detail)`.
#[pyfunction]
#[pyo3(signature = (u0, phi, mu0, mu1, dt, r, rp, rpp, u_inf = None))]
#[allow(clippy::too_many_arguments)]
fn check_assumptions(
    u0: &PyField,
    phi: &PyField,
    mu0: f64,
    mu1: f64,
    dt: f64,
    r: Vec<f64>,
    rp: Vec<f64>,
    rpp: Vec<f64>,
    u_inf: Option<&PyField>,
) -> PyResult<Vec<(String, bool, String)>> {
    let setup = measured_setup(u0, phi, params(mu0, mu1, None, None, u_inf)?, dt, r, rp, rpp)?;
    Ok(check(&setup)
        .checks
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect())
}

#[pymodule]
fn kvinverse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(physical, m)?)?;
    m.add_function(wrap_pyfunction!(run_direct, m)?)?;
    m.add_function(wrap_pyfunction!(twin, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_solve, m)?)?;
    m.add_function(wrap_pyfunction!(march, m)?)?;
    m.add_function(wrap_pyfunction!(check_assumptions, m)?)?;
    m.add("AssumptionError", m.py().get_type::<AssumptionError>())?;
    m.add("NotConvergedError", m.py().get_type::<NotConvergedError>())?;
    Ok(())
}
