//! JSON run configuration.
//!
//! ```json
//! {
//!   "mode": "oseen",
//!   "grid": { "dim": 2, "n": 16 },
//!   "model": { "lambda": 2.0, "kappa1": 2.0, "kappa2": 1.0, "nu": 1.25 },
//!   "kernel": { "type": "physical" },
//!   "fields": {
//!     "u0": { "preset": "mixed" },
//!     "phi": { "preset": "probe" },
//!     "u_inf": { "preset": "taylor_green" }
//!   },
//!   "time": { "t_end": 1.0, "dt": 0.001, "tau": 0.25 },
//!   "solver": { "tol": 1e-8, "max_iter": 50 }
//! }
//! ```
//!
//! `model` takes either `mu0`, `mu1` or the four physical constants. Field
//! sources are presets (`preset`, optional `amplitude`) or coefficient files
//! (`file`), see [`crate::io::read_field_file`]. Relative paths resolve
//! against the directory of the configuration file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::forward::{Advection, ModelParams};
use crate::inverse::{FixedPointConfig, Mode};
use crate::memory::{KernelSpec, PhysicalParams};
use crate::spectral::{Grid, SpectralField};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Mode,
    grid: RawGrid,
    model: RawModel,
    #[serde(default)]
    kernel: Option<RawKernel>,
    fields: RawFields,
    time: RawTime,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    twin: RawTwin,
    #[serde(default)]
    io: RawIo,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    n: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    mu0: Option<f64>,
    mu1: Option<f64>,
    lambda: Option<f64>,
    kappa1: Option<f64>,
    kappa2: Option<f64>,
    nu: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawKernel {
    Zero,
    Exponential { gamma: f64, delta: f64 },
    Physical,
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    Preset {
        preset: String,
        #[serde(default = "one")]
        amplitude: f64,
    },
    File {
        file: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFields {
    u0: FieldSource,
    phi: FieldSource,
    #[serde(default)]
    u_inf: Option<FieldSource>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: f64,
    dt: f64,
    tau: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSolver {
    tol: f64,
    max_iter: usize,
    enforce_smallness: bool,
    alpha_floor: Option<f64>,
    compat_tol: f64,
    smoothing: Option<usize>,
}

impl Default for RawSolver {
    fn default() -> Self {
        RawSolver {
            tol: 1e-8,
            max_iter: 50,
            enforce_smallness: false,
            alpha_floor: None,
            compat_tol: 1e-6,
            smoothing: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTwin {
    refinement: usize,
}

impl Default for RawTwin {
    fn default() -> Self {
        RawTwin { refinement: 1 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawIo {
    output_dir: PathBuf,
}

impl Default for RawIo {
    fn default() -> Self {
        RawIo {
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverSettings {
    pub fixed_point: FixedPointConfig,
    pub alpha_floor: Option<f64>,
    pub compat_tol: f64,
    /// Half-width of the local quadratic fit used when derivatives of `r`
    /// are computed from data.
    pub smoothing: Option<usize>,
}

/// Validated configuration with derived constants.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub grid: Arc<Grid>,
    pub mu0: f64,
    pub mu1: f64,
    pub physical: Option<PhysicalParams>,
    pub kernel: KernelSpec,
    pub u0: SpectralField,
    pub phi: SpectralField,
    pub u_inf: Option<SpectralField>,
    pub t_end: f64,
    pub dt: f64,
    pub tau: f64,
    pub solver: SolverSettings,
    pub twin_refinement: usize,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn model_params(&self) -> Result<ModelParams> {
        let advection = match (&self.mode, &self.u_inf) {
            (Mode::Oseen, Some(w)) => Advection::Oseen(w.clone()),
            (Mode::Oseen, None) => return Err(Error::Config("mode oseen needs fields.u_inf".into())),
            (Mode::Kv, _) => Advection::Nonlinear,
        };
        ModelParams::new(self.mu0, self.mu1, self.kernel.clone(), advection)
    }

    /// Kernel decay constants `(γ, δ)` when the kernel is exponential.
    pub fn gamma_delta(&self) -> Option<(f64, f64)> {
        match self.kernel {
            KernelSpec::Exponential { gamma, delta } => Some((gamma, delta)),
            _ => None,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, base)
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let grid = Grid::new(raw.grid.dim, raw.grid.n).map_err(|e| Error::Config(e.to_string()))?;

    let m = &raw.model;
    let direct = [m.mu0, m.mu1];
    let phys = [m.lambda, m.kappa1, m.kappa2, m.nu];
    let any_direct = direct.iter().any(Option::is_some);
    let any_phys = phys.iter().any(Option::is_some);
    let (mu0, mu1, physical) = match (any_direct, any_phys) {
        (true, true) => {
            return Err(Error::Config(
                "model: give either mu0/mu1 or lambda/kappa1/kappa2/nu, not both".into(),
            ))
        }
        (false, false) => return Err(Error::Config("model: no parameters given".into())),
        (true, false) => match direct {
            [Some(a), Some(b)] => (a, b, None),
            _ => return Err(Error::Config("model: mu0 and mu1 must both be given".into())),
        },
        (false, true) => match phys {
            [Some(lambda), Some(kappa1), Some(kappa2), Some(nu)] => {
                let p = PhysicalParams {
                    lambda,
                    kappa1,
                    kappa2,
                    nu,
                };
                p.validate()?;
                (p.mu0(), p.mu1(), Some(p))
            }
            _ => {
                return Err(Error::Config(
                    "model: lambda, kappa1, kappa2 and nu must all be given".into(),
                ))
            }
        },
    };
    for (name, v) in [("mu0", mu0), ("mu1", mu1)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("{name} must be positive, got {v}")));
        }
    }

    let kernel = match raw.kernel {
        None => match physical {
            Some(p) => KernelSpec::from_physical(&p)?,
            None => KernelSpec::Zero,
        },
        Some(RawKernel::Zero) => KernelSpec::Zero,
        Some(RawKernel::Exponential { gamma, delta }) => KernelSpec::Exponential { gamma, delta },
        Some(RawKernel::Physical) => match physical {
            Some(p) => KernelSpec::from_physical(&p)?,
            None => return Err(Error::Config("kernel 'physical' needs lambda/kappa1/kappa2/nu".into())),
        },
        Some(RawKernel::Tabulated { path }) => {
            KernelSpec::Tabulated(crate::io::read_kernel_csv(&resolve(base_dir, &path))?)
        }
    };

    let t = &raw.time;
    if !(t.dt > 0.0 && t.tau > t.dt && t.t_end >= t.tau && t.t_end.is_finite()) {
        return Err(Error::Config(format!(
            "time: need T >= tau > dt > 0, got T = {}, tau = {}, dt = {}",
            t.t_end, t.tau, t.dt
        )));
    }
    let s = &raw.solver;
    let fixed_point = FixedPointConfig {
        tau: t.tau,
        dt: t.dt,
        tol: s.tol,
        max_iter: s.max_iter,
        enforce_smallness: s.enforce_smallness,
    };
    fixed_point.steps().map_err(|e| Error::Config(e.to_string()))?;
    crate::forward::step_count(t.t_end, t.dt).map_err(|e| Error::Config(e.to_string()))?;
    if !(s.compat_tol > 0.0) {
        return Err(Error::Config("solver.compat_tol must be positive".into()));
    }
    if raw.twin.refinement == 0 {
        return Err(Error::Config("twin.refinement must be at least 1".into()));
    }

    let load = |src: &FieldSource| -> Result<SpectralField> {
        match src {
            FieldSource::Preset { preset, amplitude } => crate::presets::preset(&grid, preset, *amplitude),
            FieldSource::File { file } => crate::io::read_field_file(&grid, &resolve(base_dir, file)),
        }
    };
    let u0 = load(&raw.fields.u0)?;
    let phi = load(&raw.fields.phi)?;
    let u_inf = match (&raw.mode, &raw.fields.u_inf) {
        (Mode::Oseen, Some(src)) => Some(load(src)?),
        (Mode::Oseen, None) => return Err(Error::Config("mode oseen needs fields.u_inf".into())),
        (Mode::Kv, Some(_)) => return Err(Error::Config("fields.u_inf is only used in mode oseen".into())),
        (Mode::Kv, None) => None,
    };

    Ok(RunConfig {
        mode: raw.mode,
        grid,
        mu0,
        mu1,
        physical,
        kernel,
        u0,
        phi,
        u_inf,
        t_end: t.t_end,
        dt: t.dt,
        tau: t.tau,
        solver: SolverSettings {
            fixed_point,
            alpha_floor: s.alpha_floor,
            compat_tol: s.compat_tol,
            smoothing: s.smoothing,
        },
        twin_refinement: raw.twin.refinement,
        output_dir: resolve(base_dir, &raw.io.output_dir),
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
