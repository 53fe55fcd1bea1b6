//! Trapezoid convolution quadrature for the hereditary term
//! `∫₀ᵗ k(t-s) f(s) ds`, the three-way history split used by window
//! continuation, and numerical checks of the convolution/primitive
//! inequalities that drive the contraction argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, Trajectory};

/// Relative tolerance when comparing time steps of two traces.
const DT_RTOL: f64 = 1e-9;

fn same_dt(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() <= DT_RTOL * a.abs().max(b.abs()) {
        Ok(())
    } else {
        Err(Error::StepMismatch(a, b))
    }
}

/// Uniformly sampled memory kernel `k(t_n)`, `n = 0..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTrace {
    dt: f64,
    samples: Vec<f64>,
}

impl KernelTrace {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if samples.is_empty() {
            return Err(Error::InvalidInput("empty kernel trace".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite kernel sample at index {i}")));
        }
        Ok(KernelTrace { dt, samples })
    }

    pub fn zeros(dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt, vec![0.0; steps + 1])
    }

    pub fn constant(value: f64, dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt, vec![value; steps + 1])
    }

    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dt, (0..=steps).map(|i| f(i as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|i| i as f64 * self.dt).collect()
    }

    /// Trapezoid `L²(0,τ)` norm.
    pub fn l2_norm(&self) -> f64 {
        time_l2_norm(&self.samples, self.dt)
    }

    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end >= self.samples.len() {
            return Err(Error::InvalidInput(format!(
                "window {start}..={end} outside kernel of {} samples",
                self.samples.len()
            )));
        }
        Self::new(self.dt, self.samples[start..=end].to_vec())
    }

    /// Linear interpolation at time `t` (clamped to the sampled range).
    pub fn interpolate(&self, t: f64) -> f64 {
        let x = (t / self.dt).max(0.0);
        let i = x.floor() as usize;
        if i + 1 >= self.samples.len() {
            return *self.samples.last().expect("non-empty");
        }
        let w = x - i as f64;
        (1.0 - w) * self.samples[i] + w * self.samples[i + 1]
    }
}

/// Constitutive parameters of the Kelvin-Voigt model: relaxation time
/// `lambda`, retardation times `kappa1`, `kappa2` and viscosity `nu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub lambda: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub nu: f64,
}

impl PhysicalParams {
    /// `μ₁ = 2κ₂/λ`.
    pub fn mu1(&self) -> f64 {
        2.0 * self.kappa2 / self.lambda
    }

    /// `μ₀ = (2/λ)(κ₁ − κ₂/λ)`.
    pub fn mu0(&self) -> f64 {
        2.0 / self.lambda * (self.kappa1 - self.kappa2 / self.lambda)
    }

    /// Amplitude of the exponential kernel, `(2/λ)(ν − κ₁/λ + κ₂/λ²)`.
    pub fn gamma(&self) -> f64 {
        let l = self.lambda;
        2.0 / l * (self.nu - self.kappa1 / l + self.kappa2 / (l * l))
    }

    /// Decay rate of the exponential kernel, `1/λ`.
    pub fn delta(&self) -> f64 {
        1.0 / self.lambda
    }

    /// All inputs and all derived quantities must be positive.
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("lambda", self.lambda),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("nu", self.nu),
            ("mu0", self.mu0()),
            ("mu1", self.mu1()),
            ("gamma", self.gamma()),
            ("delta", self.delta()),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Description of a known kernel for forward runs.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    Zero,
    /// `k(t) = γ e^{−δt}`.
    Exponential { gamma: f64, delta: f64 },
    Tabulated(KernelTrace),
}

impl KernelSpec {
    pub fn from_physical(p: &PhysicalParams) -> Result<Self> {
        p.validate()?;
        Ok(KernelSpec::Exponential {
            gamma: p.gamma(),
            delta: p.delta(),
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            KernelSpec::Zero => 0.0,
            KernelSpec::Exponential { gamma, delta } => gamma * (-delta * t).exp(),
            KernelSpec::Tabulated(trace) => trace.interpolate(t),
        }
    }

    /// Samples at `t_n = n·dt`, `n = 0..=steps`.
    pub fn sample(&self, dt: f64, steps: usize) -> Result<KernelTrace> {
        KernelTrace::from_fn(dt, steps, |t| self.eval(t))
    }
}

#[inline]
fn trap_weight(i: usize, lo: usize, hi: usize) -> f64 {
    if i == lo || i == hi {
        0.5
    } else {
        1.0
    }
}

/// Trapezoid `‖f‖_{L²(0,τ)}` of uniformly spaced samples.
pub fn time_l2_norm(samples: &[f64], dt: f64) -> f64 {
    let m = samples.len();
    if m < 2 {
        return 0.0;
    }
    let sum: f64 = samples
        .iter()
        .enumerate()
        .map(|(i, v)| trap_weight(i, 0, m - 1) * v * v)
        .sum();
    (dt * sum).sqrt()
}

/// `‖a − b‖_{L²} / ‖b‖_{L²}` over the common samples of two traces.
pub fn relative_l2_error(a: &KernelTrace, b: &KernelTrace) -> Result<f64> {
    same_dt(a.dt, b.dt)?;
    let n = a.len().min(b.len());
    let diff: Vec<f64> = a.samples[..n].iter().zip(&b.samples[..n]).map(|(x, y)| x - y).collect();
    let reference = time_l2_norm(&b.samples[..n], b.dt);
    let err = time_l2_norm(&diff, a.dt);
    Ok(if reference > 0.0 { err / reference } else { err })
}

/// Running trapezoid integral `∫₀^{t_n} f`, same length as `f`.
pub fn cumulative_trapezoid(f: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    for (i, v) in f.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * dt * (f[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Trapezoid convolution on raw slices: `∫₀^{t_n} k(t_n − s) f(s) ds`.
pub(crate) fn conv_slice(k: &[f64], f: &[f64], n: usize, dt: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for j in 0..=n {
        acc += trap_weight(j, 0, n) * k[n - j] * f[j];
    }
    dt * acc
}

/// Field-valued counterpart of [`conv_slice`].
pub(crate) fn conv_fields(k: &[f64], f: &[SpectralField], n: usize, dt: f64) -> SpectralField {
    let mut out = SpectralField::zeros(f[0].grid());
    if n == 0 {
        return out;
    }
    for j in 0..=n {
        let w = dt * trap_weight(j, 0, n) * k[n - j];
        if w != 0.0 {
            out.axpy(w, &f[j]);
        }
    }
    out
}

/// `∫_{t_j}^{τ} k(τ + t_j − s) f(s) ds` over samples `j..=M` of `f`.
pub(crate) fn tail_slice(k: &[f64], f: &[f64], j: usize, dt: f64) -> f64 {
    let m = f.len() - 1;
    if j >= m {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in j..=m {
        acc += trap_weight(i, j, m) * k[m + j - i] * f[i];
    }
    dt * acc
}

pub(crate) fn tail_fields(k: &[f64], f: &[SpectralField], j: usize, dt: f64) -> SpectralField {
    let m = f.len() - 1;
    let mut out = SpectralField::zeros(f[0].grid());
    if j >= m {
        return out;
    }
    for i in j..=m {
        let w = dt * trap_weight(i, j, m) * k[m + j - i];
        if w != 0.0 {
            out.axpy(w, &f[i]);
        }
    }
    out
}

/// Trapezoid approximation of `∫₀^{t_n} k(t_n − s) f(s) ds`, where `f` is
/// sampled on the same grid as `k`.
pub fn convolve_scalar(k: &KernelTrace, f: &[f64], n: usize) -> Result<f64> {
    let needed = n + 1;
    if k.len() < needed || f.len() < needed {
        return Err(Error::LengthMismatch {
            expected: needed,
            found: k.len().min(f.len()),
        });
    }
    Ok(conv_slice(&k.samples, f, n, k.dt))
}

/// Componentwise trapezoid convolution of `k` against a field trajectory.
/// Apply the Laplacian to the result (or pass `Δu`) for the memory term.
pub fn convolve_field(k: &KernelTrace, traj: &Trajectory, n: usize) -> Result<SpectralField> {
    same_dt(k.dt, traj.dt())?;
    let needed = n + 1;
    if k.len() < needed || traj.len() < needed {
        return Err(Error::LengthMismatch {
            expected: needed,
            found: k.len().min(traj.len()),
        });
    }
    Ok(conv_fields(&k.samples, traj.fields(), n, k.dt))
}

/// Three-term evaluation of `∫₀^{τ+t} k(τ+t−s) v(s) ds` for a kernel and a
/// trajectory that are stored as a history part on `[0,τ]` (`k_hat`,
/// `v_hat`) and a continuation part on `[0,δ]` (`k_tau`, `v_tau`), at the
/// continuation index `j` (`t = j·dt`):
///
/// `k_tau ∗ v_hat + k_hat ∗ v_tau + ∫_t^τ k_hat(τ+t−s) v_hat(s) ds`.
///
/// Requires `δ ≤ τ`.
pub fn split_convolution(
    k_hat: &KernelTrace,
    k_tau: &KernelTrace,
    v_hat: &Trajectory,
    v_tau: &Trajectory,
    j: usize,
) -> Result<SpectralField> {
    same_dt(k_hat.dt, k_tau.dt)?;
    same_dt(k_hat.dt, v_hat.dt())?;
    same_dt(k_hat.dt, v_tau.dt())?;
    let m = v_hat.steps();
    let d = v_tau.steps();
    if d > m {
        return Err(Error::WindowTooLarge {
            delta: v_tau.duration(),
            tau: v_hat.duration(),
        });
    }
    if k_hat.steps() < m || k_tau.steps() < d {
        return Err(Error::LengthMismatch {
            expected: m + 1,
            found: k_hat.len(),
        });
    }
    if j > d {
        return Err(Error::OutsideWindow {
            t: j as f64 * k_hat.dt,
            window: v_tau.duration(),
        });
    }
    let dt = k_hat.dt;
    let mut out = conv_fields(&k_tau.samples, v_hat.fields(), j, dt);
    out += &conv_fields(&k_hat.samples, v_tau.fields(), j, dt);
    out += &tail_fields(&k_hat.samples, v_hat.fields(), j, dt);
    Ok(out)
}

/// History source `h(t) = −∫_t^τ k̂(τ+t−s) Δv̂(s) ds` at index `j`.
/// The pressure contribution is a gradient and drops out under projection.
pub fn history_source(k_hat: &KernelTrace, v_hat: &Trajectory, j: usize) -> Result<SpectralField> {
    same_dt(k_hat.dt, v_hat.dt())?;
    let m = v_hat.steps();
    if j > m {
        return Err(Error::OutsideWindow {
            t: j as f64 * k_hat.dt,
            window: v_hat.duration(),
        });
    }
    if k_hat.steps() < m {
        return Err(Error::LengthMismatch {
            expected: m + 1,
            found: k_hat.len(),
        });
    }
    Ok(tail_fields(&k_hat.samples, v_hat.fields(), j, k_hat.dt)
        .laplacian()
        .scaled(-1.0))
}

/// Both sides of `‖k∗f‖_{L²} ≤ τ^{1/2}‖k‖_{L²}‖f‖_{L²}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct YoungReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, defined as 0 when the right-hand side vanishes.
    pub ratio: f64,
}

pub fn check_young_bound(k: &KernelTrace, f: &[f64]) -> Result<YoungReport> {
    if f.len() != k.len() {
        return Err(Error::LengthMismatch {
            expected: k.len(),
            found: f.len(),
        });
    }
    let conv: Vec<f64> = (0..k.len()).map(|n| conv_slice(&k.samples, f, n, k.dt)).collect();
    let lhs = time_l2_norm(&conv, k.dt);
    let rhs = k.duration().sqrt() * k.l2_norm() * time_l2_norm(f, k.dt);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(YoungReport { lhs, rhs, ratio })
}

/// Bounds on a function vanishing at zero by its time derivative:
/// `‖z‖_∞ ≤ τ^{1/2}‖∂ₜz‖_{L²}` and `‖z‖_{L²} ≤ τ‖∂ₜz‖_{L²}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PrimitiveReport {
    pub sup: f64,
    pub l2: f64,
    pub derivative_l2: f64,
    pub sup_ratio: f64,
    pub l2_ratio: f64,
}

pub fn check_time_primitive_bound(z: &[f64], dt: f64) -> Result<PrimitiveReport> {
    if z.len() < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let scale = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if z[0].abs() > 1e-14 * (1.0 + scale) {
        return Err(Error::InvalidInput(format!("z(0) = {} must vanish", z[0])));
    }
    let tau = dt * (z.len() - 1) as f64;
    let derivative_l2 = (z
        .windows(2)
        .map(|w| {
            let d = (w[1] - w[0]) / dt;
            d * d
        })
        .sum::<f64>()
        * dt)
        .sqrt();
    let sup = scale;
    let l2 = time_l2_norm(z, dt);
    let (sup_ratio, l2_ratio) = if derivative_l2 > 0.0 {
        (sup / (tau.sqrt() * derivative_l2), l2 / (tau * derivative_l2))
    } else {
        (0.0, 0.0)
    };
    Ok(PrimitiveReport {
        sup,
        l2,
        derivative_l2,
        sup_ratio,
        l2_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use approx::assert_relative_eq;

    #[test]
    fn constant_convolution_is_exact() {
        let dt = 0.01;
        let k = KernelTrace::constant(1.0, dt, 100).unwrap();
        let f = vec![1.0; 101];
        for n in [0, 1, 37, 100] {
            assert_relative_eq!(
                convolve_scalar(&k, &f, n).unwrap(),
                n as f64 * dt,
                max_relative = 1e-13
            );
        }
        let zero = vec![0.0; 101];
        assert_eq!(convolve_scalar(&k, &zero, 50).unwrap(), 0.0);
    }

    #[test]
    fn exponential_against_closed_form() {
        let dt = 1e-3;
        let k = KernelTrace::from_fn(dt, 1000, |t| (-t).exp()).unwrap();
        let f = vec![1.0; 1001];
        let got = convolve_scalar(&k, &f, 1000).unwrap();
        assert!((got - (1.0 - (-1.0f64).exp())).abs() < dt * dt);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let k = KernelTrace::zeros(0.1, 3).unwrap();
        assert!(matches!(
            convolve_scalar(&k, &[1.0; 10], 8),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn physical_parameter_map() {
        let p = PhysicalParams {
            lambda: 2.0,
            kappa1: 2.0,
            kappa2: 1.0,
            nu: 1.25,
        };
        assert_relative_eq!(p.mu1(), 1.0);
        assert_relative_eq!(p.mu0(), 1.5);
        assert_relative_eq!(p.gamma(), 0.5);
        assert_relative_eq!(p.delta(), 0.5);
        assert!(p.validate().is_ok());
        let bad = PhysicalParams { kappa1: 0.1, ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn field_convolution_trivial_cases() {
        let g = Grid::new(2, 8).unwrap();
        let f = SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let traj = Trajectory::constant(&f, 0.1, 10).unwrap();
        let zero = KernelTrace::zeros(0.1, 10).unwrap();
        assert!(convolve_field(&zero, &traj, 10).unwrap().is_zero());
        let one = KernelTrace::constant(1.0, 0.1, 10).unwrap();
        let got = convolve_field(&one, &traj, 7).unwrap();
        assert!((&got - &f.scaled(0.7)).max_abs() < 1e-14);
        let other = KernelTrace::constant(1.0, 0.2, 10).unwrap();
        assert!(matches!(
            convolve_field(&other, &traj, 3),
            Err(Error::StepMismatch(..))
        ));
    }

    #[test]
    fn history_source_cases() {
        let g = Grid::new(2, 8).unwrap();
        let f = SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let dt = 0.05;
        let m = 10;
        let v_hat = Trajectory::constant(&f, dt, m).unwrap();
        let k_hat = KernelTrace::constant(1.0, dt, m).unwrap();
        assert!(history_source(&k_hat, &v_hat, m).unwrap().is_zero());
        let zero_k = KernelTrace::zeros(dt, m).unwrap();
        assert!(history_source(&zero_k, &v_hat, 3).unwrap().is_zero());
        // constant integrand: h = −(τ − t)·Δf
        let j = 4;
        let h = history_source(&k_hat, &v_hat, j).unwrap();
        let expected = f.laplacian().scaled(-((m - j) as f64) * dt);
        assert!((&h - &expected).max_abs() < 1e-14);
        assert!(matches!(
            history_source(&k_hat, &v_hat, m + 1),
            Err(Error::OutsideWindow { .. })
        ));
    }

    #[test]
    fn split_at_zero_is_tail_only() {
        let g = Grid::new(2, 8).unwrap();
        let dt = 0.1;
        let v_hat = Trajectory::new(
            dt,
            (0..=6)
                .map(|i| SpectralField::from_fn(&g, |x| [0.0, (i as f64 * 0.3 + x[0]).sin(), 0.0]))
                .collect(),
        )
        .unwrap();
        let v_tau = v_hat.window(3, 6).unwrap();
        let k_hat = KernelTrace::from_fn(dt, 6, |t| 1.0 + t).unwrap();
        let k_tau = k_hat.window(3, 6).unwrap();
        let split = split_convolution(&k_hat, &k_tau, &v_hat, &v_tau, 0).unwrap();
        let mono = convolve_field(&k_hat, &v_hat, 6).unwrap();
        assert!((&split - &mono).max_abs() < 1e-14);
        let too_long = KernelTrace::from_fn(dt, 8, |t| t).unwrap();
        let v_long = Trajectory::constant(v_hat.first(), dt, 8).unwrap();
        assert!(matches!(
            split_convolution(&k_hat, &too_long, &v_hat, &v_long, 0),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn young_bound_closed_form() {
        let k = KernelTrace::constant(1.0, 1e-3, 1000).unwrap();
        let r = check_young_bound(&k, &vec![1.0; 1001]).unwrap();
        assert_relative_eq!(r.lhs, 3f64.sqrt().recip(), max_relative = 1e-5);
        assert_relative_eq!(r.rhs, 1.0, max_relative = 1e-12);
        let zero = KernelTrace::zeros(1e-3, 1000).unwrap();
        assert_eq!(check_young_bound(&zero, &vec![1.0; 1001]).unwrap().ratio, 0.0);
    }

    #[test]
    fn primitive_bound_cases() {
        let dt = 1e-3;
        let z: Vec<f64> = (0..=1000).map(|i| i as f64 * dt).collect();
        let r = check_time_primitive_bound(&z, dt).unwrap();
        assert_relative_eq!(r.sup, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.sup_ratio, 1.0, max_relative = 1e-9);
        let zeros = vec![0.0; 11];
        let r = check_time_primitive_bound(&zeros, 0.1).unwrap();
        assert_eq!((r.sup_ratio, r.l2_ratio), (0.0, 0.0));
        let s: Vec<f64> = (0..=1000).map(|i| (i as f64 * dt).sin()).collect();
        let r = check_time_primitive_bound(&s, dt).unwrap();
        assert!(r.sup_ratio <= 1.0 + 5.0 * dt && r.l2_ratio <= 1.0 + 5.0 * dt);
        assert!(check_time_primitive_bound(&[1.0, 2.0], 0.1).is_err());
    }
}
