//! Direct problem: IMEX integration of the Kelvin-Voigt system with a known
//! memory kernel, and synthesis of measurement traces for twin experiments.
//!
//! Every mode obeys `(1+μ₁|ξ|²)∂ₜû = −μ₀|ξ|²û + N̂(t)`. The stiff term is
//! treated by Crank–Nicolson, `N` by two-step Adams–Bashforth (forward Euler
//! on the first step).
//!
//! Two formulations are available. [`Scheme::Primitive`] steps `u` directly.
//! [`Scheme::Differentiated`] steps `v = ∂ₜu` with the time-differentiated
//! equation and recovers `u = u₀ + ∫v` by the trapezoid rule; this is the
//! discretization used by the inverse solver, so twin data produced with it
//! is a discrete fixed point of the reconstruction map.

use crate::error::{Error, Result};
use crate::memory::{conv_fields, KernelSpec, KernelTrace};
use crate::spectral::{measurement_functional, recover_pressure, PressureField, SpectralField, Trajectory};

/// Abort once a norm exceeds this multiple of its initial value.
const GROWTH_LIMIT: f64 = 1e6;

/// Relative divergence admitted for fields declared divergence-free.
pub(crate) const DIV_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum Advection {
    /// `(u·∇)u`
    Nonlinear,
    /// `(u∞·∇)u`
    Oseen(SpectralField),
}

impl Advection {
    pub fn is_oseen(&self) -> bool {
        matches!(self, Advection::Oseen(_))
    }

    /// Unprojected `(a·∇)u` with `a = u` or `u∞`.
    pub(crate) fn of_velocity(&self, u: &SpectralField) -> Result<SpectralField> {
        match self {
            Advection::Nonlinear => u.advect_raw(u),
            Advection::Oseen(w) => w.advect_raw(u),
        }
    }

    /// Unprojected time derivative of the advection term along `∂ₜu = v`:
    /// `(v·∇)u + (u·∇)v`, or `(u∞·∇)v` for Oseen.
    pub(crate) fn derivative(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        match self {
            Advection::Nonlinear => {
                let mut out = v.advect_raw(u)?;
                out += &u.advect_raw(v)?;
                Ok(out)
            }
            Advection::Oseen(w) => w.advect_raw(v),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelParams {
    pub mu0: f64,
    pub mu1: f64,
    pub kernel: KernelSpec,
    pub advection: Advection,
}

impl ModelParams {
    pub fn new(mu0: f64, mu1: f64, kernel: KernelSpec, advection: Advection) -> Result<Self> {
        let p = ModelParams {
            mu0,
            mu1,
            kernel,
            advection,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return Err(Error::Config(format!("mu0 must be positive, got {}", self.mu0)));
        }
        if !(self.mu1 > 0.0 && self.mu1.is_finite()) {
            return Err(Error::Config(format!("mu1 must be positive, got {}", self.mu1)));
        }
        if let Advection::Oseen(w) = &self.advection {
            let div = relative_divergence(w);
            if div > DIV_TOL {
                return Err(Error::Assumption(format!(
                    "H4: u_inf is not divergence-free (relative divergence {div:e})"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn relative_divergence(f: &SpectralField) -> f64 {
    f.max_divergence() / f.max_abs().max(f64::MIN_POSITIVE)
}

/// Samples of `r`, `r′`, `r″` on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementTrace {
    pub dt: f64,
    pub r: Vec<f64>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
}

impl MeasurementTrace {
    pub fn new(dt: f64, r: Vec<f64>, r1: Vec<f64>, r2: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if r.is_empty() {
            return Err(Error::InvalidInput("empty measurement".into()));
        }
        for other in [&r1, &r2] {
            if other.len() != r.len() {
                return Err(Error::LengthMismatch {
                    expected: r.len(),
                    found: other.len(),
                });
            }
        }
        if r.iter().chain(&r1).chain(&r2).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite measurement sample".into()));
        }
        Ok(MeasurementTrace { dt, r, r1, r2 })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.r.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.r.len()).map(|i| i as f64 * self.dt).collect()
    }

    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end >= self.r.len() {
            return Err(Error::InvalidInput(format!(
                "window {start}..={end} outside measurement of {} samples",
                self.r.len()
            )));
        }
        Self::new(
            self.dt,
            self.r[start..=end].to_vec(),
            self.r1[start..=end].to_vec(),
            self.r2[start..=end].to_vec(),
        )
    }

    /// Every `factor`-th sample.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.steps() % factor != 0 {
            return Err(Error::InvalidInput(format!(
                "cannot subsample {} steps by {factor}",
                self.steps()
            )));
        }
        let pick = |x: &[f64]| x.iter().step_by(factor).copied().collect::<Vec<_>>();
        Self::new(self.dt * factor as f64, pick(&self.r), pick(&self.r1), pick(&self.r2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    Primitive,
    #[default]
    Differentiated,
}

#[derive(Clone, Debug)]
pub struct DirectRun {
    pub u: Trajectory,
    pub v: Trajectory,
    pub kernel: KernelTrace,
    pub measurement: MeasurementTrace,
}

/// One CN/AB2 update of `(1+μ₁K)(x' − x)/dt = −μ₀K(x' + x)/2 + e` per mode.
pub(crate) fn imex_step(x: &SpectralField, explicit: &SpectralField, mu0: f64, mu1: f64, dt: f64) -> SpectralField {
    let grid = x.grid().clone();
    let size = grid.size();
    let mut out = x.clone();
    for (i, (o, e)) in out.coeffs_mut().iter_mut().zip(explicit.coeffs()).enumerate() {
        let k2 = grid.k2(i % size);
        let m = 1.0 + mu1 * k2;
        let a = 0.5 * mu0 * k2 * dt;
        *o = (*o * (m - a) + e * dt) / (m + a);
    }
    out
}

/// Adams–Bashforth extrapolation, forward Euler without a previous value.
pub(crate) fn extrapolate(current: &SpectralField, previous: Option<&SpectralField>) -> SpectralField {
    match previous {
        Some(p) => {
            let mut e = current.scaled(1.5);
            e.axpy(-0.5, p);
            e
        }
        None => current.clone(),
    }
}

fn check_growth(step: usize, norm: f64, reference: f64) -> Result<()> {
    if !norm.is_finite() || norm > GROWTH_LIMIT * reference.max(1e-300) {
        return Err(Error::Diverged {
            step,
            detail: format!("norm {norm:e} against initial {reference:e}"),
        });
    }
    Ok(())
}

/// Projected explicit term of the velocity equation,
/// `P[Δ(k∗u)(t_n) − (a·∇)u_n]`.
fn velocity_forcing(params: &ModelParams, k: &[f64], us: &[SpectralField], n: usize, dt: f64) -> Result<SpectralField> {
    let mut out = conv_fields(k, us, n, dt).laplacian();
    out -= &params.advection.of_velocity(&us[n])?;
    Ok(out.leray_project())
}

/// One step of the velocity equation. `history` holds `u₀ … u_n`; `u_n`
/// must coincide with its last entry.
pub fn step_direct(
    u_n: &SpectralField,
    history: &Trajectory,
    k: &KernelTrace,
    params: &ModelParams,
    dt: f64,
) -> Result<SpectralField> {
    let n = history.steps();
    if k.len() <= n {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            found: k.len(),
        });
    }
    if (history.dt() - dt).abs() > 1e-12 * dt || (k.dt() - dt).abs() > 1e-12 * dt {
        return Err(Error::StepMismatch(history.dt(), dt));
    }
    u_n.ensure_same_grid(history.last())?;
    let mut us = history.fields().to_vec();
    us[n] = u_n.clone();
    let current = velocity_forcing(params, k.samples(), &us, n, dt)?;
    let previous = if n > 0 {
        Some(velocity_forcing(params, k.samples(), &us, n - 1, dt)?)
    } else {
        None
    };
    let out = imex_step(u_n, &extrapolate(&current, previous.as_ref()), params.mu0, params.mu1, dt);
    if !out.is_finite() {
        return Err(Error::Diverged {
            step: n,
            detail: "non-finite coefficients".into(),
        });
    }
    Ok(out)
}

/// `v₀ = (I − μ₁Δ)⁻¹P(μ₀Δu₀ − (a·∇)u₀)`.
pub fn initial_acceleration(u0: &SpectralField, mu0: f64, mu1: f64, advection: &Advection) -> Result<SpectralField> {
    let mut rhs = u0.laplacian().scaled(mu0);
    rhs -= &advection.of_velocity(u0)?;
    Ok(rhs.leray_project().helmholtz_inverse(mu1))
}

/// Unprojected forcing of the differentiated equation at `t_n`,
/// `k(t_n)Δu₀ + Δ(k∗v)(t_n) − d/dt[advection]`.
pub(crate) fn acceleration_forcing_raw(
    advection: &Advection,
    lap_u0: &SpectralField,
    k: &[f64],
    vs: &[SpectralField],
    u_n: &SpectralField,
    n: usize,
    dt: f64,
) -> Result<SpectralField> {
    let mut g = conv_fields(k, vs, n, dt).laplacian();
    g.axpy(k[n], lap_u0);
    g -= &advection.derivative(u_n, &vs[n])?;
    Ok(g)
}

struct Recorder<'a> {
    phi: &'a SpectralField,
    lap_phi: SpectralField,
    mu0: f64,
    mu1: f64,
    r: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(phi: &'a SpectralField, mu0: f64, mu1: f64) -> Self {
        Recorder {
            phi,
            lap_phi: phi.laplacian(),
            mu0,
            mu1,
            r: Vec::new(),
            r1: Vec::new(),
            r2: Vec::new(),
        }
    }

    /// `raw_v` is the unprojected velocity forcing `Δ(k∗u) − (a·∇)u`,
    /// `raw_g` the unprojected forcing of the differentiated equation.
    fn record(&mut self, u: &SpectralField, v: &SpectralField, raw_v: &SpectralField, raw_g: &SpectralField) -> Result<()> {
        self.r.push(measurement_functional(self.phi, u, self.mu1)?);
        self.r1.push(self.mu0 * self.lap_phi.l2_inner(u) + self.phi.l2_inner(raw_v));
        self.r2.push(self.mu0 * self.lap_phi.l2_inner(v) + self.phi.l2_inner(raw_g));
        Ok(())
    }

    fn finish(self, dt: f64) -> Result<MeasurementTrace> {
        MeasurementTrace::new(dt, self.r, self.r1, self.r2)
    }
}

fn check_inputs(u0: &SpectralField, phi: &SpectralField, params: &ModelParams, t_end: f64, dt: f64) -> Result<usize> {
    params.validate()?;
    u0.ensure_same_grid(phi)?;
    if let Advection::Oseen(w) = &params.advection {
        u0.ensure_same_grid(w)?;
    }
    let div = relative_divergence(u0);
    if div > DIV_TOL {
        return Err(Error::Assumption(format!("A1: u0 is not divergence-free (relative divergence {div:e})")));
    }
    let div = relative_divergence(phi);
    if div > DIV_TOL {
        return Err(Error::Assumption(format!("A2: phi is not divergence-free (relative divergence {div:e})")));
    }
    step_count(t_end, dt)
}

/// `t_end / dt` as an integer, rejecting non-commensurate values.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("bad time grid: T = {t_end}, dt = {dt}")));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::InvalidInput(format!("T = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

/// Integrate on `[0, t_end]` with the default differentiated scheme.
pub fn run_direct(u0: &SpectralField, params: &ModelParams, t_end: f64, dt: f64, phi: &SpectralField) -> Result<DirectRun> {
    run_direct_with(u0, params, t_end, dt, phi, Scheme::Differentiated)
}

pub fn run_direct_with(
    u0: &SpectralField,
    params: &ModelParams,
    t_end: f64,
    dt: f64,
    phi: &SpectralField,
    scheme: Scheme,
) -> Result<DirectRun> {
    let steps = check_inputs(u0, phi, params, t_end, dt)?;
    let kernel = params.kernel.sample(dt, steps)?;
    match scheme {
        Scheme::Primitive => run_primitive(u0, params, &kernel, steps, dt, phi),
        Scheme::Differentiated => run_differentiated(u0, params, &kernel, steps, dt, phi),
    }
    .map(|(u, v, measurement)| DirectRun {
        u,
        v,
        kernel,
        measurement,
    })
}

type RunOutput = (Trajectory, Trajectory, MeasurementTrace);

fn run_primitive(
    u0: &SpectralField,
    params: &ModelParams,
    kernel: &KernelTrace,
    steps: usize,
    dt: f64,
    phi: &SpectralField,
) -> Result<RunOutput> {
    let (mu0, mu1) = (params.mu0, params.mu1);
    let k = kernel.samples();
    let lap_u0 = u0.laplacian();
    let reference = u0.sobolev_norm(2.0);
    let mut rec = Recorder::new(phi, mu0, mu1);
    let mut us = vec![u0.clone()];
    let mut vs: Vec<SpectralField> = Vec::with_capacity(steps + 1);
    let mut previous: Option<SpectralField> = None;
    for n in 0..=steps {
        let mut raw_v = conv_fields(k, &us, n, dt).laplacian();
        raw_v -= &params.advection.of_velocity(&us[n])?;
        let forcing = raw_v.leray_project();
        let mut rhs = us[n].laplacian().scaled(mu0);
        rhs += &forcing;
        vs.push(rhs.helmholtz_inverse(mu1));
        let raw_g = acceleration_forcing_raw(&params.advection, &lap_u0, k, &vs, &us[n], n, dt)?;
        rec.record(&us[n], &vs[n], &raw_v, &raw_g)?;
        if n == steps {
            break;
        }
        let next = imex_step(&us[n], &extrapolate(&forcing, previous.as_ref()), mu0, mu1, dt);
        check_growth(n + 1, next.sobolev_norm(2.0), reference)?;
        us.push(next);
        previous = Some(forcing);
    }
    Ok((Trajectory::new(dt, us)?, Trajectory::new(dt, vs)?, rec.finish(dt)?))
}

fn run_differentiated(
    u0: &SpectralField,
    params: &ModelParams,
    kernel: &KernelTrace,
    steps: usize,
    dt: f64,
    phi: &SpectralField,
) -> Result<RunOutput> {
    let (mu0, mu1) = (params.mu0, params.mu1);
    let k = kernel.samples();
    let lap_u0 = u0.laplacian();
    let reference = u0.sobolev_norm(2.0);
    let mut rec = Recorder::new(phi, mu0, mu1);
    let mut us = vec![u0.clone()];
    let mut vs = vec![initial_acceleration(u0, mu0, mu1, &params.advection)?];
    let mut previous: Option<SpectralField> = None;
    for n in 0..=steps {
        let mut raw_v = conv_fields(k, &us, n, dt).laplacian();
        raw_v -= &params.advection.of_velocity(&us[n])?;
        let raw_g = acceleration_forcing_raw(&params.advection, &lap_u0, k, &vs, &us[n], n, dt)?;
        rec.record(&us[n], &vs[n], &raw_v, &raw_g)?;
        if n == steps {
            break;
        }
        let g = raw_g.leray_project();
        let v_next = imex_step(&vs[n], &extrapolate(&g, previous.as_ref()), mu0, mu1, dt);
        let mut u_next = us[n].clone();
        u_next.axpy(0.5 * dt, &vs[n]);
        u_next.axpy(0.5 * dt, &v_next);
        check_growth(n + 1, u_next.sobolev_norm(2.0), reference)?;
        us.push(u_next);
        vs.push(v_next);
        previous = Some(g);
    }
    Ok((Trajectory::new(dt, us)?, Trajectory::new(dt, vs)?, rec.finish(dt)?))
}

/// Forward-solve outputs bundled with the tabulated true kernel.
#[derive(Clone, Debug)]
pub struct TwinDataset {
    pub measurement: MeasurementTrace,
    pub k_true: KernelTrace,
    pub u: Trajectory,
    pub v: Trajectory,
}

/// Synthesize twin data on `[0, t_end]` at step `dt`. With `refinement > 1`
/// the forward solve runs at `dt / refinement` and is subsampled, so the
/// data does not share the inverse solver's discretization.
pub fn synthesize_twin(
    u0: &SpectralField,
    phi: &SpectralField,
    params: &ModelParams,
    t_end: f64,
    dt: f64,
    refinement: usize,
) -> Result<TwinDataset> {
    if refinement == 0 {
        return Err(Error::InvalidInput("refinement must be at least 1".into()));
    }
    let alpha_inv = phi.l2_inner(&u0.laplacian());
    if alpha_inv == 0.0 {
        return Err(Error::Assumption("A3: integral of phi . Laplacian(u0) vanishes".into()));
    }
    let steps = step_count(t_end, dt)?;
    let fine_dt = dt / refinement as f64;
    let run = run_direct(u0, params, t_end, fine_dt, phi)?;
    let pick = |t: Trajectory| -> Result<Trajectory> {
        Trajectory::new(dt, t.into_fields().into_iter().step_by(refinement).collect())
    };
    Ok(TwinDataset {
        measurement: run.measurement.subsample(refinement)?,
        k_true: params.kernel.sample(dt, steps)?,
        u: pick(run.u)?,
        v: pick(run.v)?,
    })
}

/// Pressure of the velocity `u` under the model's advection.
pub fn pressure(params: &ModelParams, u: &SpectralField) -> Result<PressureField> {
    match &params.advection {
        Advection::Nonlinear => recover_pressure(u, u),
        Advection::Oseen(w) => recover_pressure(w, u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::sync::Arc;

    fn shear(g: &Arc<Grid>) -> SpectralField {
        SpectralField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0])
    }

    fn params(kernel: KernelSpec, advection: Advection) -> ModelParams {
        ModelParams::new(1.5, 1.0, kernel, advection).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid::new(2, 8).unwrap();
        let u = SpectralField::zeros(&g);
        let p = params(KernelSpec::Zero, Advection::Nonlinear);
        let hist = Trajectory::constant(&u, 0.01, 0).unwrap();
        let k = KernelTrace::zeros(0.01, 0).unwrap();
        assert!(step_direct(&u, &hist, &k, &p, 0.01).unwrap().is_zero());
        let run = run_direct(&u, &p, 0.1, 0.01, &shear(&g)).unwrap();
        let m = &run.measurement;
        assert!(m.r.iter().chain(&m.r1).chain(&m.r2).all(|v| *v == 0.0));
    }

    #[test]
    fn single_mode_follows_crank_nicolson() {
        let g = Grid::new(2, 8).unwrap();
        let u = shear(&g);
        let p = params(KernelSpec::Zero, Advection::Oseen(SpectralField::zeros(&g)));
        let dt = 0.01;
        let ratio = (2.0 - 1.5 * dt / 2.0) / (2.0 + 1.5 * dt / 2.0);
        let hist = Trajectory::constant(&u, dt, 0).unwrap();
        let k = KernelTrace::zeros(dt, 0).unwrap();
        let next = step_direct(&u, &hist, &k, &p, dt).unwrap();
        assert!((&next - &u.scaled(ratio)).max_abs() < 1e-15);
        for scheme in [Scheme::Primitive, Scheme::Differentiated] {
            let run = run_direct_with(&u, &p, 0.2, dt, &u, scheme).unwrap();
            let expected = u.scaled(ratio.powi(20));
            assert!((run.u.last() - &expected).max_abs() < 1e-14, "{scheme:?}");
        }
    }

    #[test]
    fn rejects_divergent_initial_data() {
        let g = Grid::new(2, 8).unwrap();
        let grad = SpectralField::from_fn(&g, |x| [x[0].cos(), 0.0, 0.0]);
        let p = params(KernelSpec::Zero, Advection::Nonlinear);
        let err = run_direct(&grad, &p, 0.1, 0.01, &shear(&g)).unwrap_err();
        assert!(matches!(err, Error::Assumption(ref s) if s.starts_with("A1")));
        assert!(ModelParams::new(0.0, 1.0, KernelSpec::Zero, Advection::Nonlinear).is_err());
        assert!(ModelParams::new(1.0, 1.0, KernelSpec::Zero, Advection::Oseen(grad)).is_err());
    }

    #[test]
    fn initial_measurement_identities() {
        let g = Grid::new(2, 16).unwrap();
        let u0 = SpectralField::from_fn(&g, |x| {
            [x[0].sin() * x[1].cos() + 0.5 * (2.0 * x[1]).sin(), -x[0].cos() * x[1].sin() + 0.3 * x[0].cos(), 0.0]
        });
        let phi = SpectralField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), 0.0]);
        let p = params(KernelSpec::Exponential { gamma: 0.5, delta: 0.5 }, Advection::Nonlinear);
        let run = run_direct(&u0, &p, 0.05, 0.01, &phi).unwrap();
        let m = &run.measurement;
        let lhs = phi.apply_helmholtz(1.0).l2_inner(&u0);
        assert!((m.r[0] - lhs).abs() < 1e-12 * lhs.abs().max(1.0));
        let adv = u0.advect_raw(&u0).unwrap();
        let r1 = 1.5 * phi.l2_inner(&u0.laplacian()) - phi.l2_inner(&adv);
        assert!((m.r1[0] - r1).abs() < 1e-10);
        // r′(0) is also the measurement of v₀
        let mv = measurement_functional(&phi, run.v.first(), 1.0).unwrap();
        assert!((m.r1[0] - mv).abs() < 1e-10);
    }

    #[test]
    fn divergence_free_through_nonlinear_run() {
        let g = Grid::new(2, 16).unwrap();
        let u0 = SpectralField::from_fn(&g, |x| {
            [x[0].sin() * x[1].cos() + 0.5 * (2.0 * x[1]).sin(), -x[0].cos() * x[1].sin() + 0.3 * x[0].cos(), 0.0]
        });
        let p = params(KernelSpec::Exponential { gamma: 0.5, delta: 0.5 }, Advection::Nonlinear);
        let run = run_direct(&u0, &p, 0.1, 0.01, &u0).unwrap();
        for f in run.u.fields().iter().chain(run.v.fields()) {
            assert!(f.max_divergence() < 1e-12);
            assert!(f.mode(&[0, 0]).unwrap().iter().all(|c| c.norm() < 1e-14));
        }
    }

    #[test]
    fn subsample_and_window() {
        let m = MeasurementTrace::new(0.1, vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![1.0; 5], vec![0.0; 5]).unwrap();
        let s = m.subsample(2).unwrap();
        assert_eq!(s.r, vec![0.0, 2.0, 4.0]);
        assert!((s.dt - 0.2).abs() < 1e-15);
        assert!(m.subsample(3).is_err());
        assert_eq!(m.window(1, 3).unwrap().r, vec![1.0, 2.0, 3.0]);
        assert!(MeasurementTrace::new(0.1, vec![0.0; 3], vec![0.0; 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn step_count_validation() {
        assert_eq!(step_count(0.25, 1e-3).unwrap(), 250);
        assert!(step_count(0.2505, 1e-3).is_err());
    }
}
