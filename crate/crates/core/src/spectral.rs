//! Pseudo-spectral representation of vector fields on the periodic box
//! `[0, 2π)^d`.
//!
//! Fields are stored as Fourier coefficients normalised so that
//! `f(x) = Σ_ξ f̂(ξ) e^{iξ·x}`. With this convention the L² inner product is
//! `(2π)^d Σ_ξ Re(â(ξ)·conj(b̂(ξ)))` and every differential operator used by
//! the solvers (Laplacian, Leray projector, `(I - μ₁Δ)⁻¹`) is diagonal.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Side length of the periodic box along every axis.
pub const BOX_LENGTH: f64 = 2.0 * PI;

/// Uniform periodic grid with precomputed wavevectors, the 2/3-rule
/// dealiasing mask and FFT plans.
pub struct Grid {
    dim: usize,
    n: usize,
    size: usize,
    wavevectors: Vec<[f64; 3]>,
    k2: Vec<f64>,
    mask: Vec<bool>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl Grid {
    /// Build a grid with `n` modes per axis in `dim` dimensions.
    pub fn new(dim: usize, n: usize) -> Result<Arc<Grid>> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidInput(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "modes per axis must be even and >= 4, got {n}"
            )));
        }
        let size = n.pow(dim as u32);
        let mut wavevectors = Vec::with_capacity(size);
        let mut k2 = Vec::with_capacity(size);
        let mut mask = Vec::with_capacity(size);
        for idx in 0..size {
            let mut xi = [0.0; 3];
            let mut rem = idx;
            let mut keep = true;
            for axis in (0..dim).rev() {
                let i = (rem % n) as i64;
                rem /= n;
                let k = if i < (n / 2) as i64 { i } else { i - n as i64 };
                if 3 * k.abs() > n as i64 {
                    keep = false;
                }
                xi[axis] = k as f64;
            }
            k2.push(xi.iter().map(|x| x * x).sum());
            wavevectors.push(xi);
            mask.push(keep);
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            dim,
            n,
            size,
            wavevectors,
            k2,
            mask,
            fft_forward: planner.plan_fft_forward(n),
            fft_inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes_per_axis(&self) -> usize {
        self.n
    }

    /// Number of Fourier modes (and physical grid points) per component.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn wavevector(&self, idx: usize) -> &[f64] {
        &self.wavevectors[idx][..self.dim]
    }

    /// `|ξ|²` for flat mode index `idx`.
    pub fn k2(&self, idx: usize) -> f64 {
        self.k2[idx]
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.mask
    }

    /// `(2π)^d`, the volume of the box.
    pub fn volume(&self) -> f64 {
        BOX_LENGTH.powi(self.dim as i32)
    }

    /// Flat index of the integer wavevector `xi`, or `None` when it is not
    /// representable on this grid.
    pub fn mode_index(&self, xi: &[i64]) -> Option<usize> {
        if xi.len() != self.dim {
            return None;
        }
        let half = (self.n / 2) as i64;
        let mut idx = 0usize;
        for &k in xi {
            if k < -half || k >= half {
                return None;
            }
            let i = if k < 0 { k + self.n as i64 } else { k } as usize;
            idx = idx * self.n + i;
        }
        Some(idx)
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = BOX_LENGTH / self.n as f64;
        let mut x = [0.0; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            x[axis] = (rem % self.n) as f64 * h;
            rem /= self.n;
        }
        x
    }

    fn compatible(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n
    }

    /// In-place multidimensional FFT. `inverse = false` maps physical values
    /// to (unnormalised) spectral sums.
    fn fft(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse {
            &self.fft_inverse
        } else {
            &self.fft_forward
        };
        let n = self.n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let outer = self.size / (stride * n);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * stride * n + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process(&mut line);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
    }

    /// Spectral coefficients of a real scalar sampled on the grid.
    pub fn forward_scalar(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft(&mut data, false);
        let norm = 1.0 / self.size as f64;
        for c in &mut data {
            *c *= norm;
        }
        data
    }

    /// Grid values of the real scalar with coefficients `coeffs`.
    pub fn inverse_scalar(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        self.fft(&mut data, true);
        data.into_iter().map(|c| c.re).collect()
    }
}

fn ensure_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.compatible(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: (a.dim, a.n),
            right: (b.dim, b.n),
        })
    }
}

/// A real vector field in Fourier space. Components are stored contiguously,
/// component `c` occupying `data[c*size .. (c+1)*size]`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: grid.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.dim * grid.size],
        }
    }

    /// Sample `f` at the grid points and transform. `f` returns up to three
    /// components; only the first `dim` are used.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> [f64; 3]) -> Self {
        let mut comps = vec![vec![0.0; grid.size]; grid.dim];
        for idx in 0..grid.size {
            let x = grid.point(idx);
            let value = f(&x[..grid.dim]);
            for (c, comp) in comps.iter_mut().enumerate() {
                comp[idx] = value[c];
            }
        }
        Self::from_physical(grid, &comps).expect("component count matches grid")
    }

    pub fn from_physical(grid: &Arc<Grid>, comps: &[Vec<f64>]) -> Result<Self> {
        if comps.len() != grid.dim || comps.iter().any(|c| c.len() != grid.size) {
            return Err(Error::LengthMismatch {
                expected: grid.dim * grid.size,
                found: comps.iter().map(Vec::len).sum(),
            });
        }
        let mut data = Vec::with_capacity(grid.dim * grid.size);
        for comp in comps {
            data.extend(grid.forward_scalar(comp));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            data,
        })
    }

    /// Build from raw coefficients in the storage layout.
    pub fn from_coeffs(grid: &Arc<Grid>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.dim * grid.size {
            return Err(Error::LengthMismatch {
                expected: grid.dim * grid.size,
                found: data.len(),
            });
        }
        Ok(SpectralField {
            grid: grid.clone(),
            data,
        })
    }

    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        (0..self.grid.dim)
            .map(|c| self.grid.inverse_scalar(self.component(c)))
            .collect()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let s = self.grid.size;
        &self.data[c * s..(c + 1) * s]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let s = self.grid.size;
        &mut self.data[c * s..(c + 1) * s]
    }

    /// Coefficient vector at wavevector `xi`.
    pub fn mode(&self, xi: &[i64]) -> Option<Vec<Complex64>> {
        let idx = self.grid.mode_index(xi)?;
        Some((0..self.grid.dim).map(|c| self.component(c)[idx]).collect())
    }

    /// Set the coefficient at `xi` and its Hermitian partner at `-xi`.
    pub fn set_mode(&mut self, xi: &[i64], value: &[Complex64]) -> Result<()> {
        let idx = self
            .grid
            .mode_index(xi)
            .ok_or_else(|| Error::InvalidInput(format!("wavevector {xi:?} not on grid")))?;
        let neg: Vec<i64> = xi.iter().map(|k| -k).collect();
        let nidx = self
            .grid
            .mode_index(&neg)
            .ok_or_else(|| Error::InvalidInput(format!("wavevector {neg:?} not on grid")))?;
        for (c, v) in value.iter().enumerate().take(self.grid.dim) {
            self.component_mut(c)[idx] = *v;
            self.component_mut(c)[nidx] = v.conj();
        }
        Ok(())
    }

    pub fn ensure_same_grid(&self, other: &SpectralField) -> Result<()> {
        ensure_same_grid(&self.grid, &other.grid)
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert!(self.grid.compatible(&x.grid));
        for (y, xv) in self.data.iter_mut().zip(&x.data) {
            *y += xv * a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out *= a;
        out
    }

    /// Apply a real per-mode multiplier to every component.
    pub fn map_modes(&self, multiplier: impl Fn(usize) -> f64) -> SpectralField {
        let mut out = self.clone();
        let size = self.grid.size;
        for (i, c) in out.data.iter_mut().enumerate() {
            *c *= multiplier(i % size);
        }
        out
    }

    pub fn laplacian(&self) -> SpectralField {
        let g = &self.grid;
        self.map_modes(|i| -g.k2[i])
    }

    /// `f̂(ξ) / (1 + μ₁|ξ|²)`.
    pub fn helmholtz_inverse(&self, mu1: f64) -> SpectralField {
        let g = &self.grid;
        self.map_modes(|i| 1.0 / (1.0 + mu1 * g.k2[i]))
    }

    /// `(1 + μ₁|ξ|²) f̂(ξ)`, i.e. `(I - μ₁Δ) f`.
    pub fn apply_helmholtz(&self, mu1: f64) -> SpectralField {
        let g = &self.grid;
        self.map_modes(|i| 1.0 + mu1 * g.k2[i])
    }

    /// Zero every mode outside the 2/3-rule mask.
    pub fn dealias(&mut self) {
        let size = self.grid.size;
        let mask = &self.grid.mask;
        for (i, c) in self.data.iter_mut().enumerate() {
            if !mask[i % size] {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Leray projection onto divergence-free, zero-mean fields.
    pub fn leray_project(&self) -> SpectralField {
        let g = &*self.grid;
        let d = g.dim;
        let size = g.size;
        let mut out = self.clone();
        for i in 0..size {
            if g.k2[i] == 0.0 {
                for c in 0..d {
                    out.data[c * size + i] = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            let xi = &g.wavevectors[i];
            let mut dot = Complex64::new(0.0, 0.0);
            for c in 0..d {
                dot += self.data[c * size + i] * xi[c];
            }
            let factor = dot / g.k2[i];
            for c in 0..d {
                out.data[c * size + i] -= factor * xi[c];
            }
        }
        out
    }

    /// Spectral divergence `iξ·f̂` as a scalar coefficient array.
    pub fn divergence(&self) -> Vec<Complex64> {
        let g = &*self.grid;
        let size = g.size;
        (0..size)
            .map(|i| {
                let xi = &g.wavevectors[i];
                let mut dot = Complex64::new(0.0, 0.0);
                for c in 0..g.dim {
                    dot += self.data[c * size + i] * xi[c];
                }
                dot * Complex64::i()
            })
            .collect()
    }

    /// `max_ξ |ξ·f̂(ξ)|`.
    pub fn max_divergence(&self) -> f64 {
        self.divergence().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `f̂(-ξ) = conj(f̂(ξ))`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &*self.grid;
        let n = g.n as i64;
        let mut worst: f64 = 0.0;
        for i in 0..g.size {
            let xi: Vec<i64> = g.wavevector(i).iter().map(|&k| -(k as i64)).collect();
            // the Nyquist wavevector is its own partner modulo n
            let neg: Vec<i64> = xi
                .iter()
                .map(|&k| if k == n / 2 { -n / 2 } else { k })
                .collect();
            if let Some(j) = g.mode_index(&neg) {
                for c in 0..g.dim {
                    let a = self.data[c * g.size + i];
                    let b = self.data[c * g.size + j];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    /// L² inner product over the box.
    pub fn l2_inner(&self, other: &SpectralField) -> f64 {
        debug_assert!(self.grid.compatible(&other.grid));
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        self.grid.volume() * sum
    }

    /// `‖f‖_{H^s}` with multiplier `(1 + |ξ|²)^s`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let g = &*self.grid;
        let size = g.size;
        let sum: f64 = self
            .data
            .iter()
            .enumerate()
            .map(|(i, c)| (1.0 + g.k2[i % size]).powf(s) * c.norm_sqr())
            .sum();
        g.volume() * sum
    }

    /// Squared H² norm, the spatial norm used by all time-space norms.
    pub fn h2_norm_sq(&self) -> f64 {
        let g = &*self.grid;
        let size = g.size;
        let sum: f64 = self
            .data
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let w = 1.0 + g.k2[i % size];
                w * w * c.norm_sqr()
            })
            .sum();
        g.volume() * sum
    }

    /// Gradient of each component in physical space: `out[c][j] = ∂_j f_c`.
    fn physical_gradients(&self) -> Vec<Vec<Vec<f64>>> {
        let g = &*self.grid;
        (0..g.dim)
            .map(|c| {
                let comp = self.component(c);
                (0..g.dim)
                    .map(|j| {
                        let d: Vec<Complex64> = comp
                            .iter()
                            .enumerate()
                            .map(|(i, v)| v * Complex64::new(0.0, g.wavevectors[i][j]))
                            .collect();
                        g.inverse_scalar(&d)
                    })
                    .collect()
            })
            .collect()
    }

    /// Dealiased pseudo-spectral `(self·∇) b` without projection.
    pub fn advect_raw(&self, b: &SpectralField) -> Result<SpectralField> {
        self.ensure_same_grid(b)?;
        let g = &self.grid;
        let a_phys = self.to_physical();
        let grads = b.physical_gradients();
        let mut comps = Vec::with_capacity(g.dim);
        for grad_c in grads.iter() {
            let mut prod = vec![0.0; g.size];
            for (j, a_j) in a_phys.iter().enumerate() {
                for ((p, a), d) in prod.iter_mut().zip(a_j).zip(&grad_c[j]) {
                    *p += a * d;
                }
            }
            comps.push(prod);
        }
        let mut out = SpectralField::from_physical(g, &comps)?;
        out.dealias();
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Leray-projected, dealiased `(a·∇) b`.
pub fn advect(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    Ok(a.advect_raw(b)?.leray_project())
}

/// `∫ (I - μ₁Δ)φ · u dx`.
pub fn measurement_functional(phi: &SpectralField, u: &SpectralField, mu1: f64) -> Result<f64> {
    phi.ensure_same_grid(u)?;
    let g = &*phi.grid;
    let size = g.size;
    let sum: f64 = phi
        .data
        .iter()
        .zip(&u.data)
        .enumerate()
        .map(|(i, (p, v))| (1.0 + mu1 * g.k2[i % size]) * (p.re * v.re + p.im * v.im))
        .sum();
    Ok(g.volume() * sum)
}

/// Zero-mean scalar field (pressure) in Fourier space.
#[derive(Clone, Debug)]
pub struct PressureField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl PressureField {
    pub fn from_coeffs(grid: &Arc<Grid>, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.size {
            return Err(Error::LengthMismatch {
                expected: grid.size,
                found: coeffs.len(),
            });
        }
        coeffs[0] = Complex64::new(0.0, 0.0);
        Ok(PressureField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.size)
            .map(|i| f(&grid.point(i)[..grid.dim]))
            .collect();
        Self::from_coeffs(grid, grid.forward_scalar(&values)).expect("sized by grid")
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse_scalar(&self.coeffs)
    }

    /// `∇p` as a vector field (multiplier `iξ`).
    pub fn gradient(&self) -> SpectralField {
        let g = &self.grid;
        let mut out = SpectralField::zeros(g);
        for c in 0..g.dim {
            let comp = out.component_mut(c);
            for (i, slot) in comp.iter_mut().enumerate() {
                *slot = self.coeffs[i] * Complex64::new(0.0, g.wavevectors[i][c]);
            }
        }
        out
    }
}

/// Pressure balancing the advection term `(a·∇)b`: solves
/// `-Δp = ∇·[(a·∇)b]` with zero mean.
pub fn recover_pressure(a: &SpectralField, b: &SpectralField) -> Result<PressureField> {
    let g = a.grid.clone();
    let adv = a.advect_raw(b)?;
    let div = adv.divergence();
    let coeffs = div
        .iter()
        .enumerate()
        .map(|(i, d)| {
            if g.k2[i] == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                d / g.k2[i]
            }
        })
        .collect();
    PressureField::from_coeffs(&g, coeffs)
}

/// Fields sampled at `t_n = n·dt`, `n = 0..=M`, on a shared grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    dt: f64,
    fields: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(dt: f64, fields: Vec<SpectralField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if fields.is_empty() {
            return Err(Error::InvalidInput("empty trajectory".into()));
        }
        for f in &fields[1..] {
            fields[0].ensure_same_grid(f)?;
        }
        Ok(Trajectory { dt, fields })
    }

    /// Constant-in-time trajectory with `steps + 1` samples.
    pub fn constant(field: &SpectralField, dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt, vec![field.clone(); steps + 1])
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn into_fields(self) -> Vec<SpectralField> {
        self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fields[0].grid()
    }

    pub fn first(&self) -> &SpectralField {
        &self.fields[0]
    }

    pub fn last(&self) -> &SpectralField {
        &self.fields[self.fields.len() - 1]
    }

    pub fn get(&self, n: usize) -> Option<&SpectralField> {
        self.fields.get(n)
    }

    /// Samples `start..=end` as a new trajectory.
    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end >= self.fields.len() {
            return Err(Error::InvalidInput(format!(
                "window {start}..={end} outside trajectory of {} samples",
                self.fields.len()
            )));
        }
        Self::new(self.dt, self.fields[start..=end].to_vec())
    }

    /// Discrete `‖·‖_{H¹(0,τ; H²)}`: trapezoid in time of the squared H²
    /// norm plus the same for the forward-difference time derivative.
    pub fn h1_h2_norm(&self) -> f64 {
        time_space_norm(&self.fields, self.dt)
    }
}

/// Discrete `H¹(0,τ; H²)` norm of a sampled field sequence.
pub fn time_space_norm(fields: &[SpectralField], dt: f64) -> f64 {
    let m = fields.len();
    if m == 0 {
        return 0.0;
    }
    let mut value = 0.0;
    for (i, f) in fields.iter().enumerate() {
        let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
        value += w * dt * f.h2_norm_sq();
    }
    for pair in fields.windows(2) {
        let diff = &pair[1] - &pair[0];
        value += diff.h2_norm_sq() / dt;
    }
    value.sqrt()
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

impl MulAssign<f64> for SpectralField {
    fn mul_assign(&mut self, a: f64) {
        for c in &mut self.data {
            *c *= a;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}
