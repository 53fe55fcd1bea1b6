//! Global-in-time reconstruction by window marching. After a window
//! `[0,τ]` has converged, the problem on `[τ, τ+δ]` (`δ ≤ τ`) is posed in
//! shifted time with the converged history frozen: the memory integral is
//! split into `k_τ∗v̂ + k̂∗v_τ + ∫_t^τ k̂(τ+t−s)v̂(s)ds`, the last term being
//! the history source. The windows are then glued.
//!
//! Oseen marching is the supported case. Kelvin-Voigt marching shifts the
//! nonlinear terms with `u(τ+t) = u(τ) + ∫v_τ` and is experimental.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{acceleration_forcing_raw, step_count, Advection};
use crate::inverse::{
    check_assumptions, cumulative_fields, solve_window, FixedPointConfig, FixedPointResult, History, Mode,
    Observer, ProblemSetup, WindowProblem,
};
use crate::memory::{history_source, tail_slice, KernelTrace};
use crate::spectral::{SpectralField, Trajectory};

/// Discontinuities found when gluing a window onto the history.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Junction {
    pub time: f64,
    /// `‖v_τ(0) − v̂(τ)‖_{H²}`
    pub v_jump: f64,
    /// `|k_τ(0) − k̂(τ)|`
    pub k_jump: f64,
}

/// Converged history on `[0, offset]`.
#[derive(Clone, Debug)]
pub struct WindowState {
    pub v_hat: Trajectory,
    pub k_hat: KernelTrace,
    pub junctions: Vec<Junction>,
}

impl WindowState {
    pub fn new(v_hat: Trajectory, k_hat: KernelTrace) -> Result<Self> {
        if v_hat.len() != k_hat.len() {
            return Err(Error::LengthMismatch {
                expected: v_hat.len(),
                found: k_hat.len(),
            });
        }
        if (v_hat.dt() - k_hat.dt()).abs() > 1e-12 * v_hat.dt() {
            return Err(Error::StepMismatch(v_hat.dt(), k_hat.dt()));
        }
        Ok(WindowState {
            v_hat,
            k_hat,
            junctions: Vec::new(),
        })
    }

    pub fn from_result(result: &FixedPointResult) -> Result<Self> {
        Self::new(result.v.clone(), result.k.clone())
    }

    pub fn dt(&self) -> f64 {
        self.v_hat.dt()
    }

    pub fn offset_steps(&self) -> usize {
        self.v_hat.steps()
    }

    /// Current window start `τ`.
    pub fn offset(&self) -> f64 {
        self.v_hat.duration()
    }

    /// `v(τ)`, the initial value of the next window.
    pub fn u_tau(&self) -> &SpectralField {
        self.v_hat.last()
    }
}

/// Pose the problem on `[τ, τ+δ]` in shifted time, with `δ = delta_steps·dt`.
pub fn shift_problem(state: &WindowState, setup: &ProblemSetup, delta_steps: usize) -> Result<WindowProblem> {
    let m = state.offset_steps();
    let dt = state.dt();
    if delta_steps > m {
        return Err(Error::WindowTooLarge {
            delta: delta_steps as f64 * dt,
            tau: state.offset(),
        });
    }
    let meas = &setup.measurement;
    if (meas.dt - dt).abs() > 1e-12 * dt {
        return Err(Error::StepMismatch(meas.dt, dt));
    }
    if m + delta_steps > meas.steps() {
        return Err(Error::LengthMismatch {
            expected: m + delta_steps + 1,
            found: meas.len(),
        });
    }
    let mut problem = WindowProblem::fresh(setup, 0)?;
    let v_hat = state.v_hat.fields();
    let k_hat = state.k_hat.samples();
    let u_hist = cumulative_fields(&setup.u0, v_hat, dt);

    let a_hat: Vec<f64> = v_hat.iter().map(|f| f.l2_inner(&problem.lap_phi)).collect();
    let mut tail = Vec::with_capacity(delta_steps + 1);
    let mut tail_scalar = Vec::with_capacity(delta_steps + 1);
    for j in 0..=delta_steps {
        tail.push(history_source(&state.k_hat, &state.v_hat, j)?.scaled(-1.0));
        tail_scalar.push(tail_slice(k_hat, &a_hat, j, dt));
    }
    let prev_forcing = if m > 0 {
        let g = acceleration_forcing_raw(&setup.params.advection, &problem.lap_u0, k_hat, v_hat, &u_hist[m - 1], m - 1, dt)?;
        Some(g.leray_project())
    } else {
        None
    };

    problem.base_u = u_hist[m].clone();
    problem.v_start = state.u_tau().clone();
    problem.r2 = meas.r2[m..=m + delta_steps].to_vec();
    problem.history = Some(History {
        k_hat: k_hat.to_vec(),
        v_hat: v_hat.to_vec(),
        a_hat,
        tail,
        tail_scalar,
        prev_forcing,
    });
    Ok(problem)
}

/// Append a converged window. The duplicated junction sample is averaged.
pub fn glue(state: &WindowState, v_tau: &Trajectory, k_tau: &KernelTrace, limit: f64) -> Result<WindowState> {
    let dt = state.dt();
    for other in [v_tau.dt(), k_tau.dt()] {
        if (other - dt).abs() > 1e-12 * dt {
            return Err(Error::StepMismatch(dt, other));
        }
    }
    if v_tau.len() != k_tau.len() {
        return Err(Error::LengthMismatch {
            expected: v_tau.len(),
            found: k_tau.len(),
        });
    }
    let v_jump = (v_tau.first() - state.u_tau()).sobolev_norm(2.0);
    if !(v_jump <= limit) {
        return Err(Error::JunctionMismatch { jump: v_jump, limit });
    }
    let m = state.offset_steps();
    let k_prev = state.k_hat.samples()[m];
    let k_next = k_tau.samples()[0];

    let mut vs = state.v_hat.fields().to_vec();
    let mut joint = vs[m].clone();
    joint += v_tau.first();
    vs[m] = joint.scaled(0.5);
    vs.extend(v_tau.fields()[1..].iter().cloned());

    let mut ks = state.k_hat.samples().to_vec();
    ks[m] = 0.5 * (k_prev + k_next);
    ks.extend_from_slice(&k_tau.samples()[1..]);

    let mut junctions = state.junctions.clone();
    junctions.push(Junction {
        time: state.offset(),
        v_jump,
        k_jump: (k_prev - k_next).abs(),
    });
    Ok(WindowState {
        v_hat: Trajectory::new(dt, vs)?,
        k_hat: KernelTrace::new(dt, ks)?,
        junctions,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowReport {
    pub start: f64,
    pub tau: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub max_ratio: f64,
    /// `‖v_τ‖_{H¹(0,δ;H²)} + ‖k_τ‖_{L²(0,δ)}`, the a-priori bound monitor.
    pub combined_norm: f64,
}

#[derive(Clone, Debug)]
pub struct MarchResult {
    pub v: Trajectory,
    pub k: KernelTrace,
    pub windows: Vec<WindowReport>,
    pub junctions: Vec<Junction>,
    /// `true` if `[0, T]` was covered with every window converged.
    pub completed: bool,
    pub failure: Option<String>,
    pub experimental: bool,
}

impl MarchResult {
    pub fn t_reached(&self) -> f64 {
        self.k.duration()
    }

    /// Largest window norm over the first one.
    pub fn monitor_ratio(&self) -> f64 {
        let first = self.windows.first().map_or(0.0, |w| w.combined_norm);
        let max = self.windows.iter().map(|w| w.combined_norm).fold(0.0, f64::max);
        if first > 0.0 {
            max / first
        } else {
            0.0
        }
    }

    pub fn max_junction_jump(&self) -> f64 {
        self.junctions
            .iter()
            .map(|j| j.v_jump.max(j.k_jump))
            .fold(0.0, f64::max)
    }
}

fn report(start: f64, res: &FixedPointResult) -> WindowReport {
    WindowReport {
        start,
        tau: res.tau,
        iterations: res.iterations,
        restarts: res.restarts,
        converged: res.converged,
        max_ratio: res.max_ratio(),
        combined_norm: res.combined_norm(),
    }
}

/// March windows of length at most `cfg.tau` over `[0, t_end]`.
pub fn march_global(
    setup: &ProblemSetup,
    cfg: &FixedPointConfig,
    t_end: f64,
    mut observer: Option<Observer<'_>>,
) -> Result<MarchResult> {
    check_assumptions(setup).into_result()?;
    let window_steps = cfg.steps()?;
    let total = step_count(t_end, cfg.dt)?;
    if (setup.measurement.dt - cfg.dt).abs() > 1e-12 * cfg.dt {
        return Err(Error::StepMismatch(setup.measurement.dt, cfg.dt));
    }
    if setup.measurement.steps() < total {
        return Err(Error::LengthMismatch {
            expected: total + 1,
            found: setup.measurement.len(),
        });
    }
    let experimental = setup.mode() == Mode::Kv;
    let limit = 100.0 * cfg.tol;

    let first = WindowProblem::fresh(setup, window_steps.min(total))?;
    let mut windows = Vec::new();
    let res = match solve_window(&first, cfg, None, observer.as_mut().map(|o| &mut **o as Observer<'_>)) {
        Ok(r) => r,
        Err(e) => {
            let state = WindowState::new(
                Trajectory::constant(setup.v0(), cfg.dt, 0)?,
                KernelTrace::zeros(cfg.dt, 0)?,
            )?;
            return Ok(partial(state, windows, format!("window at t = 0: {e}"), experimental));
        }
    };
    windows.push(report(0.0, &res));
    let mut state = WindowState::from_result(&res)?;
    if !res.converged {
        return Ok(partial(state, windows, "window at t = 0 did not converge".into(), experimental));
    }

    while state.offset_steps() < total {
        let m = state.offset_steps();
        let d = m.min(total - m).min(window_steps);
        let start = state.offset();
        let outcome = shift_problem(&state, setup, d)
            .and_then(|p| solve_window(&p, cfg, None, observer.as_mut().map(|o| &mut **o as Observer<'_>)));
        let res = match outcome {
            Ok(r) => r,
            Err(e) => return Ok(partial(state, windows, format!("window at t = {start}: {e}"), experimental)),
        };
        windows.push(report(start, &res));
        if !res.converged {
            return Ok(partial(
                state,
                windows,
                format!("window at t = {start} did not converge"),
                experimental,
            ));
        }
        state = match glue(&state, &res.v, &res.k, limit) {
            Ok(s) => s,
            Err(e) => return Ok(partial(state, windows, format!("gluing at t = {start}: {e}"), experimental)),
        };
    }

    Ok(MarchResult {
        v: state.v_hat,
        k: state.k_hat,
        windows,
        junctions: state.junctions,
        completed: true,
        failure: None,
        experimental,
    })
}

fn partial(state: WindowState, windows: Vec<WindowReport>, failure: String, experimental: bool) -> MarchResult {
    MarchResult {
        v: state.v_hat,
        k: state.k_hat,
        windows,
        junctions: state.junctions,
        completed: false,
        failure: Some(failure),
        experimental,
    }
}

/// `true` for models whose marching is covered by the theory.
pub fn is_supported(advection: &Advection) -> bool {
    advection.is_oseen()
}
