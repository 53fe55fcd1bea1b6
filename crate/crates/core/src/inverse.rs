//! Simultaneous reconstruction of `v = ∂ₜu` and the kernel `k` by Picard
//! iteration of the map `(ṽ, k̃) ↦ (v, k)`: an explicit kernel update from
//! the measurement followed by a linear, mode-diagonal IBVP for `v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{
    acceleration_forcing_raw, extrapolate, imex_step, initial_acceleration, relative_divergence, Advection,
    MeasurementTrace, ModelParams, DIV_TOL,
};
use crate::memory::{conv_fields, conv_slice, time_l2_norm, KernelTrace};
use crate::spectral::{measurement_functional, recover_pressure, time_space_norm, SpectralField, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Kv,
    Oseen,
}

impl Mode {
    fn prefix(self) -> char {
        match self {
            Mode::Kv => 'A',
            Mode::Oseen => 'H',
        }
    }
}

/// Model constants, data and derived quantities of the inverse problem.
#[derive(Clone, Debug)]
pub struct ProblemSetup {
    /// The kernel entry is ignored.
    pub params: ModelParams,
    pub u0: SpectralField,
    pub phi: SpectralField,
    pub measurement: MeasurementTrace,
    /// Minimum admissible `|α⁻¹|`; `None` uses `1e-8·‖φ‖‖u₀‖_{H²}`.
    pub alpha_floor: Option<f64>,
    /// Relative tolerance of the compatibility conditions on `r(0)`, `r′(0)`.
    pub compat_tol: f64,
    v0: SpectralField,
    alpha_inv: f64,
}

impl ProblemSetup {
    pub fn new(params: ModelParams, u0: SpectralField, phi: SpectralField, measurement: MeasurementTrace) -> Result<Self> {
        params.validate()?;
        u0.ensure_same_grid(&phi)?;
        if let Advection::Oseen(w) = &params.advection {
            u0.ensure_same_grid(w)?;
        }
        let v0 = initial_acceleration(&u0, params.mu0, params.mu1, &params.advection)?;
        let alpha_inv = phi.l2_inner(&u0.laplacian());
        Ok(ProblemSetup {
            params,
            u0,
            phi,
            measurement,
            alpha_floor: None,
            compat_tol: 1e-6,
            v0,
            alpha_inv,
        })
    }

    pub fn mode(&self) -> Mode {
        if self.params.advection.is_oseen() {
            Mode::Oseen
        } else {
            Mode::Kv
        }
    }

    /// `α⁻¹ = ∫φ·Δu₀ dx`.
    pub fn alpha_inv(&self) -> f64 {
        self.alpha_inv
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.alpha_inv
    }

    pub fn v0(&self) -> &SpectralField {
        &self.v0
    }

    pub fn effective_alpha_floor(&self) -> f64 {
        self.alpha_floor
            .unwrap_or_else(|| 1e-8 * self.phi.sobolev_norm(0.0) * self.u0.sobolev_norm(2.0))
    }

    fn check_alpha(&self) -> Result<f64> {
        let floor = self.effective_alpha_floor();
        if !(self.alpha_inv.abs() > floor) {
            return Err(Error::AlphaFloor {
                value: self.alpha_inv.abs(),
                floor,
            });
        }
        Ok(self.alpha())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub mode: Mode,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            let msg = self
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} ({})", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::Assumption(msg))
        }
    }
}

/// Report on the data assumptions. KV names them A1–A5, Oseen H1–H5.
pub fn check_assumptions(setup: &ProblemSetup) -> AssumptionReport {
    let mode = setup.mode();
    let p = mode.prefix();
    let mut checks = Vec::new();
    let mut push = |n: u8, passed: bool, value: f64, limit: f64, detail: String| {
        checks.push(AssumptionCheck {
            name: format!("{p}{n}"),
            passed,
            value,
            limit,
            detail,
        })
    };

    let div = relative_divergence(&setup.u0);
    let zero_u0 = setup.u0.is_zero();
    push(
        1,
        div <= DIV_TOL && setup.u0.is_finite(),
        div,
        DIV_TOL,
        format!("relative divergence of u0 {div:e}{}", if zero_u0 { ", u0 = 0" } else { "" }),
    );

    let div = relative_divergence(&setup.phi);
    let zero_phi = setup.phi.is_zero();
    push(
        2,
        div <= DIV_TOL && !zero_phi && setup.phi.is_finite(),
        div,
        DIV_TOL,
        if zero_phi {
            "phi vanishes".into()
        } else {
            format!("relative divergence of phi {div:e}")
        },
    );

    let floor = setup.effective_alpha_floor();
    let a = setup.alpha_inv.abs();
    push(3, a > floor, a, floor, format!("|alpha^-1| = {a:e}, floor {floor:e}"));

    let (h4_ok, h4_detail) = match &setup.params.advection {
        Advection::Oseen(w) => {
            let d = relative_divergence(w);
            (d <= DIV_TOL && setup.v0.is_finite(), format!("relative divergence of u_inf {d:e}"))
        }
        Advection::Nonlinear => (
            setup.v0.is_finite(),
            format!("|v0|_H2 = {:e}", setup.v0.sobolev_norm(2.0)),
        ),
    };
    push(4, h4_ok, setup.v0.sobolev_norm(2.0), f64::INFINITY, h4_detail);

    let m = &setup.measurement;
    let (expected_r, expected_r1) = initial_measurement(setup).unwrap_or((f64::NAN, f64::NAN));
    let err_r = (m.r[0] - expected_r).abs();
    let err_r1 = (m.r1[0] - expected_r1).abs();
    let lim_r = setup.compat_tol * expected_r.abs().max(1.0);
    let lim_r1 = setup.compat_tol * expected_r1.abs().max(1.0);
    let mismatch = (err_r / lim_r).max(err_r1 / lim_r1);
    push(
        5,
        mismatch <= 1.0,
        err_r.max(err_r1),
        lim_r.min(lim_r1),
        format!("|r(0) - r0| = {err_r:e} (limit {lim_r:e}), |r'(0) - r1| = {err_r1:e} (limit {lim_r1:e})"),
    );

    AssumptionReport { mode, checks }
}

/// Values of `r(0)` and `r′(0)` implied by the initial data:
/// `r(0) = ∫(I−μ₁Δ)φ·u₀` and `r′(0) = μ₀∫φ·Δu₀ − ∫((a·∇)u₀)·φ` with `a = u₀` or `u∞`.
pub fn initial_measurement(setup: &ProblemSetup) -> Result<(f64, f64)> {
    let r0 = measurement_functional(&setup.phi, &setup.u0, setup.params.mu1)?;
    let adv = setup.params.advection.of_velocity(&setup.u0)?;
    Ok((r0, setup.params.mu0 * setup.alpha_inv - setup.phi.l2_inner(&adv)))
}

/// `v₀ = (I − μ₁Δ)⁻¹P(μ₀Δu₀ − (a·∇)u₀)`.
pub fn compute_v0(setup: &ProblemSetup) -> SpectralField {
    setup.v0.clone()
}

/// Pressure `p₀` belonging to the initial data.
pub fn initial_pressure(setup: &ProblemSetup) -> Result<crate::spectral::PressureField> {
    match &setup.params.advection {
        Advection::Nonlinear => recover_pressure(&setup.u0, &setup.u0),
        Advection::Oseen(w) => recover_pressure(w, &setup.u0),
    }
}

/// Frozen history of a shifted window: glued kernel and velocity on
/// `[0,τ]` together with quantities that depend on them only.
#[derive(Clone, Debug)]
pub(crate) struct History {
    pub k_hat: Vec<f64>,
    pub v_hat: Vec<SpectralField>,
    /// `⟨v̂, Δφ⟩`
    pub a_hat: Vec<f64>,
    /// `Δ∫_t^τ k̂(τ+t−s)v̂(s)ds` at the window samples.
    pub tail: Vec<SpectralField>,
    /// `⟨tail, φ⟩`
    pub tail_scalar: Vec<f64>,
    /// Projected forcing one step before the window, for AB2 continuity.
    pub prev_forcing: Option<SpectralField>,
}

/// One window of the inverse problem in local time `t ∈ [0, M·dt]`.
#[derive(Clone, Debug)]
pub struct WindowProblem {
    pub(crate) mu0: f64,
    pub(crate) mu1: f64,
    pub(crate) alpha: f64,
    pub(crate) advection: Advection,
    pub(crate) phi: SpectralField,
    pub(crate) lap_phi: SpectralField,
    pub(crate) lap_u0: SpectralField,
    /// `u` at the window start.
    pub(crate) base_u: SpectralField,
    /// `v` at the window start.
    pub(crate) v_start: SpectralField,
    pub(crate) r2: Vec<f64>,
    pub(crate) dt: f64,
    pub(crate) history: Option<History>,
}

impl WindowProblem {
    /// The problem on `[0, steps·dt]` starting from the initial data.
    pub fn fresh(setup: &ProblemSetup, steps: usize) -> Result<Self> {
        let alpha = setup.check_alpha()?;
        let m = &setup.measurement;
        if m.steps() < steps {
            return Err(Error::LengthMismatch {
                expected: steps + 1,
                found: m.len(),
            });
        }
        Ok(WindowProblem {
            mu0: setup.params.mu0,
            mu1: setup.params.mu1,
            alpha,
            advection: setup.params.advection.clone(),
            phi: setup.phi.clone(),
            lap_phi: setup.phi.laplacian(),
            lap_u0: setup.u0.laplacian(),
            base_u: setup.u0.clone(),
            v_start: setup.v0.clone(),
            r2: m.r2[..=steps].to_vec(),
            dt: m.dt,
            history: None,
        })
    }

    pub fn steps(&self) -> usize {
        self.r2.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn is_shifted(&self) -> bool {
        self.history.is_some()
    }

    /// The same problem on the first `steps` steps.
    pub fn truncated(&self, steps: usize) -> Self {
        let mut out = self.clone();
        out.r2.truncate(steps + 1);
        if let Some(h) = &mut out.history {
            h.tail.truncate(steps + 1);
            h.tail_scalar.truncate(steps + 1);
        }
        out
    }

    /// `u = base_u + ∫v` by the trapezoid rule.
    pub(crate) fn velocity(&self, v: &[SpectralField]) -> Vec<SpectralField> {
        cumulative_fields(&self.base_u, v, self.dt)
    }

    /// `Δ` of the memory integral at window index `j` for kernel `k` and
    /// velocity derivative `v` on the window.
    fn memory_field(&self, k: &[f64], v: &[SpectralField], j: usize) -> SpectralField {
        match &self.history {
            None => conv_fields(k, v, j, self.dt).laplacian(),
            Some(h) => {
                let mut acc = conv_fields(k, &h.v_hat, j, self.dt);
                acc += &conv_fields(&h.k_hat, v, j, self.dt);
                let mut out = acc.laplacian();
                out += &h.tail[j];
                out
            }
        }
    }

    /// `⟨memory_field, φ⟩` from the scalar series `a = ⟨v, Δφ⟩`.
    fn memory_scalar(&self, k: &[f64], a: &[f64], j: usize) -> f64 {
        match &self.history {
            None => conv_slice(k, a, j, self.dt),
            Some(h) => {
                conv_slice(k, &h.a_hat, j, self.dt) + conv_slice(&h.k_hat, a, j, self.dt) + h.tail_scalar[j]
            }
        }
    }

    pub(crate) fn forcing_raw(&self, k: &[f64], v: &[SpectralField], u_j: &SpectralField, j: usize) -> Result<SpectralField> {
        match &self.history {
            None => acceleration_forcing_raw(&self.advection, &self.lap_u0, k, v, u_j, j, self.dt),
            Some(_) => {
                let mut g = self.memory_field(k, v, j);
                g.axpy(k[j], &self.lap_u0);
                g -= &self.advection.derivative(u_j, &v[j])?;
                Ok(g)
            }
        }
    }

    fn check_lengths(&self, v: &Trajectory, k: &KernelTrace) -> Result<()> {
        let n = self.r2.len();
        if v.len() != n || k.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: if v.len() != n { v.len() } else { k.len() },
            });
        }
        if (v.dt() - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::StepMismatch(v.dt(), self.dt));
        }
        if (k.dt() - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::StepMismatch(k.dt(), self.dt));
        }
        Ok(())
    }

    /// Kernel update from the iterate `(ṽ, k̃)`. The advection contribution
    /// is evaluated as `⟨(ṽ·∇)U + (U·∇)ṽ, φ⟩` (KV) or `⟨(u∞·∇)ṽ, φ⟩`
    /// (Oseen), which equals the skew form by integration by parts.
    pub fn kernel_update(&self, v_tilde: &Trajectory, k_tilde: &KernelTrace) -> Result<KernelTrace> {
        self.check_lengths(v_tilde, k_tilde)?;
        let v = v_tilde.fields();
        let a: Vec<f64> = v.iter().map(|f| f.l2_inner(&self.lap_phi)).collect();
        let u = match self.advection {
            Advection::Nonlinear => self.velocity(v),
            Advection::Oseen(_) => Vec::new(),
        };
        let mut out = Vec::with_capacity(v.len());
        for j in 0..v.len() {
            let adv = match &self.advection {
                Advection::Nonlinear => self.advection.derivative(&u[j], &v[j])?,
                Advection::Oseen(w) => w.advect_raw(&v[j])?,
            };
            let value = self.r2[j] - self.mu0 * a[j] - self.memory_scalar(k_tilde.samples(), &a, j)
                + self.phi.l2_inner(&adv);
            out.push(self.alpha * value);
        }
        KernelTrace::new(self.dt, out)
    }

    /// Integrate `(1+μ₁|ξ|²)∂ₜv̂ = −μ₀|ξ|²v̂ + Ĝ` from `v_start`, with all
    /// coupling terms in `G` frozen at `ṽ`.
    pub fn solve_linear(&self, k: &KernelTrace, v_tilde: &Trajectory) -> Result<Trajectory> {
        self.check_lengths(v_tilde, k)?;
        let vt = v_tilde.fields();
        let u = match self.advection {
            Advection::Nonlinear => self.velocity(vt),
            Advection::Oseen(_) => Vec::new(),
        };
        let reference = self.v_start.sobolev_norm(2.0).max(1e-300);
        let mut out = Vec::with_capacity(vt.len());
        out.push(self.v_start.clone());
        let mut previous = self.history.as_ref().and_then(|h| h.prev_forcing.clone());
        for j in 0..vt.len() - 1 {
            let u_j = u.get(j).unwrap_or(&self.base_u);
            let g = self.forcing_raw(k.samples(), vt, u_j, j)?.leray_project();
            let next = imex_step(&out[j], &extrapolate(&g, previous.as_ref()), self.mu0, self.mu1, self.dt);
            let norm = next.sobolev_norm(2.0);
            if !norm.is_finite() || norm > 1e6 * reference {
                return Err(Error::Diverged {
                    step: j + 1,
                    detail: format!("linear solve norm {norm:e}"),
                });
            }
            out.push(next);
            previous = Some(g);
        }
        Trajectory::new(self.dt, out)
    }
}

pub(crate) fn cumulative_fields(base: &SpectralField, v: &[SpectralField], dt: f64) -> Vec<SpectralField> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = base.clone();
    out.push(acc.clone());
    for pair in v.windows(2) {
        acc.axpy(0.5 * dt, &pair[0]);
        acc.axpy(0.5 * dt, &pair[1]);
        out.push(acc.clone());
    }
    out
}

/// Fresh-problem kernel update on the full length of `v_tilde`.
pub fn kernel_update_kv(v_tilde: &Trajectory, k_tilde: &KernelTrace, setup: &ProblemSetup) -> Result<KernelTrace> {
    require_mode(setup, Mode::Kv)?;
    WindowProblem::fresh(setup, v_tilde.steps())?.kernel_update(v_tilde, k_tilde)
}

pub fn kernel_update_oseen(v_tilde: &Trajectory, k_tilde: &KernelTrace, setup: &ProblemSetup) -> Result<KernelTrace> {
    require_mode(setup, Mode::Oseen)?;
    WindowProblem::fresh(setup, v_tilde.steps())?.kernel_update(v_tilde, k_tilde)
}

pub fn solve_linear_ibvp_kv(k: &KernelTrace, v_tilde: &Trajectory, setup: &ProblemSetup) -> Result<Trajectory> {
    require_mode(setup, Mode::Kv)?;
    WindowProblem::fresh(setup, v_tilde.steps())?.solve_linear(k, v_tilde)
}

pub fn solve_linear_ibvp_oseen(k: &KernelTrace, v_tilde: &Trajectory, setup: &ProblemSetup) -> Result<Trajectory> {
    require_mode(setup, Mode::Oseen)?;
    WindowProblem::fresh(setup, v_tilde.steps())?.solve_linear(k, v_tilde)
}

fn require_mode(setup: &ProblemSetup, mode: Mode) -> Result<()> {
    if setup.mode() != mode {
        return Err(Error::InvalidInput(format!("setup is {:?}, operation needs {mode:?}", setup.mode())));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FixedPointConfig {
    pub tau: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub enforce_smallness: bool,
}

impl FixedPointConfig {
    pub fn new(tau: f64, dt: f64) -> Self {
        FixedPointConfig {
            tau,
            dt,
            tol: 1e-8,
            max_iter: 50,
            enforce_smallness: false,
        }
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        crate::forward::step_count(self.tau, self.dt)
    }
}

/// One Picard iteration as streamed to observers.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub tau: f64,
    pub delta: f64,
    pub ratio: Option<f64>,
    pub l_estimate: f64,
    pub smallness: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residuals {
    /// `max_n ‖R_n‖_{L²}` of the projected momentum equation.
    pub momentum: f64,
    /// `momentum` over the largest `L²` norm of the equation's terms.
    pub momentum_relative: f64,
    pub divergence: f64,
    /// `max_n |∫(I−μ₁Δ)φ·u_n − r(t_n)|`.
    pub overdetermination: f64,
}

#[derive(Clone, Debug)]
pub struct FixedPointResult {
    pub v: Trajectory,
    pub k: KernelTrace,
    pub iterations: usize,
    pub contraction_ratios: Vec<f64>,
    pub deltas: Vec<f64>,
    pub l_history: Vec<f64>,
    pub restarts: usize,
    pub converged: bool,
    /// Window length actually solved, after any halving.
    pub tau: f64,
    pub residuals: Option<Residuals>,
}

impl FixedPointResult {
    pub fn steps(&self) -> usize {
        self.k.steps()
    }

    /// Combined norm `‖v‖_{H¹(0,τ;H²)} + ‖k‖_{L²(0,τ)}`.
    pub fn combined_norm(&self) -> f64 {
        self.v.h1_h2_norm() + self.k.l2_norm()
    }

    pub fn max_ratio(&self) -> f64 {
        self.contraction_ratios.iter().copied().fold(0.0, f64::max)
    }
}

pub type Observer<'a> = &'a mut dyn FnMut(&IterationRecord);

pub(crate) fn combined_delta(v_new: &[SpectralField], v_old: &[SpectralField], k_new: &[f64], k_old: &[f64], dt: f64) -> f64 {
    let dv: Vec<SpectralField> = v_new.iter().zip(v_old).map(|(a, b)| a - b).collect();
    let dk: Vec<f64> = k_new.iter().zip(k_old).map(|(a, b)| a - b).collect();
    time_space_norm(&dv, dt) + time_l2_norm(&dk, dt)
}

/// Picard iteration on one window with restart-by-halving.
pub fn solve_window(
    problem: &WindowProblem,
    cfg: &FixedPointConfig,
    initial_k: Option<&KernelTrace>,
    mut observer: Option<Observer<'_>>,
) -> Result<FixedPointResult> {
    let dt = problem.dt;
    let mut steps = problem.steps();
    let mut restarts = 0;
    let mut deltas = Vec::new();
    let mut ratios = Vec::new();
    let mut l_history = Vec::new();
    let mut iterations = 0;
    loop {
        if steps < 4 {
            return Err(Error::Diverged {
                step: iterations,
                detail: format!(
                    "window halved below 4 steps after {restarts} restarts; deltas {deltas:?}, ratios {ratios:?}"
                ),
            });
        }
        let p = problem.truncated(steps);
        let tau = p.duration();
        let mut v = Trajectory::constant(&p.v_start, dt, steps)?;
        let mut k = match initial_k {
            Some(k0) if k0.len() > steps => k0.window(0, steps)?,
            Some(k0) => return Err(Error::LengthMismatch { expected: steps + 1, found: k0.len() }),
            None => KernelTrace::zeros(dt, steps)?,
        };
        let mut prev_delta: Option<f64> = None;
        let mut bad_ratios = 0;
        let mut restart = false;
        for _ in 0..cfg.max_iter {
            iterations += 1;
            let k_new = p.kernel_update(&v, &k)?;
            let v_new = p.solve_linear(&k_new, &v)?;
            let delta = combined_delta(v_new.fields(), v.fields(), k_new.samples(), k.samples(), dt);
            let l = v_new.h1_h2_norm() + k_new.l2_norm();
            let smallness = tau * (1.0 + l + l * l);
            let ratio = prev_delta.filter(|d| *d > 0.0).map(|d| delta / d);
            deltas.push(delta);
            l_history.push(l);
            if let Some(r) = ratio {
                ratios.push(r);
            }
            if let Some(obs) = observer.as_mut() {
                obs(&IterationRecord {
                    iteration: iterations,
                    tau,
                    delta,
                    ratio,
                    l_estimate: l,
                    smallness,
                });
            }
            v = v_new;
            k = k_new;
            if !delta.is_finite() {
                return Err(Error::Diverged {
                    step: iterations,
                    detail: "non-finite iterate".into(),
                });
            }
            if delta <= cfg.tol {
                if cfg.enforce_smallness && smallness > 1.0 {
                    restart = true;
                    break;
                }
                return Ok(FixedPointResult {
                    v,
                    k,
                    iterations,
                    contraction_ratios: ratios,
                    deltas,
                    l_history,
                    restarts,
                    converged: true,
                    tau,
                    residuals: None,
                });
            }
            bad_ratios = match ratio {
                Some(r) if r >= 1.0 => bad_ratios + 1,
                _ => 0,
            };
            if bad_ratios >= 3 || (cfg.enforce_smallness && smallness > 1.0) {
                restart = true;
                break;
            }
            prev_delta = Some(delta);
        }
        if !restart {
            return Ok(FixedPointResult {
                v,
                k,
                iterations,
                contraction_ratios: ratios,
                deltas,
                l_history,
                restarts,
                converged: false,
                tau,
                residuals: None,
            });
        }
        restarts += 1;
        steps /= 2;
    }
}

/// Solve on `[0, cfg.tau]` from the initial data.
pub fn fixed_point_solve(setup: &ProblemSetup, cfg: &FixedPointConfig) -> Result<FixedPointResult> {
    fixed_point_solve_with(setup, cfg, None, None)
}

pub fn fixed_point_solve_with(
    setup: &ProblemSetup,
    cfg: &FixedPointConfig,
    initial_k: Option<&KernelTrace>,
    observer: Option<Observer<'_>>,
) -> Result<FixedPointResult> {
    check_assumptions(setup).into_result()?;
    let steps = cfg.steps()?;
    if (setup.measurement.dt - cfg.dt).abs() > 1e-12 * cfg.dt {
        return Err(Error::StepMismatch(setup.measurement.dt, cfg.dt));
    }
    let problem = WindowProblem::fresh(setup, steps)?;
    let mut result = solve_window(&problem, cfg, initial_k, observer)?;
    let u = reconstruct_u(&result.v, &setup.u0)?;
    result.residuals = Some(residual_check(&u, &result.k, setup)?);
    Ok(result)
}

/// `u(t) = u₀ + ∫₀ᵗ v(s) ds` by the trapezoid rule.
pub fn reconstruct_u(v: &Trajectory, u0: &SpectralField) -> Result<Trajectory> {
    u0.ensure_same_grid(v.first())?;
    Trajectory::new(v.dt(), cumulative_fields(u0, v.fields(), v.dt()))
}

/// Discrete residuals of the direct system for a velocity trajectory `u`
/// and kernel `k`. The momentum residual uses centered differences at
/// interior samples.
pub fn residual_check(u: &Trajectory, k: &KernelTrace, setup: &ProblemSetup) -> Result<Residuals> {
    let p = &setup.params;
    let dt = u.dt();
    let us = u.fields();
    if k.len() < us.len() {
        return Err(Error::LengthMismatch {
            expected: us.len(),
            found: k.len(),
        });
    }
    let mut momentum: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for n in 1..us.len().saturating_sub(1) {
        let rate = (&us[n + 1] - &us[n - 1]).scaled(0.5 / dt).apply_helmholtz(p.mu1);
        let viscous = us[n].laplacian().scaled(p.mu0);
        let memory = conv_fields(k.samples(), us, n, dt).laplacian();
        let adv = p.advection.of_velocity(&us[n])?.leray_project();
        let mut res = rate.clone();
        res -= &viscous;
        res -= &memory;
        res += &adv;
        momentum = momentum.max(res.leray_project().sobolev_norm(0.0));
        for term in [&rate, &viscous, &memory, &adv] {
            scale = scale.max(term.sobolev_norm(0.0));
        }
    }
    let divergence = us.iter().map(|f| f.max_divergence()).fold(0.0, f64::max);
    let m = &setup.measurement;
    let mut over: f64 = 0.0;
    for (n, f) in us.iter().enumerate().take(m.len()) {
        over = over.max((measurement_functional(&setup.phi, f, p.mu1)? - m.r[n]).abs());
    }
    Ok(Residuals {
        momentum,
        momentum_relative: if scale > 0.0 { momentum / scale } else { 0.0 },
        divergence,
        overdetermination: over,
    })
}
