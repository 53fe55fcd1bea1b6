//! Quick invariant suites behind the `selftest` subcommand.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::forward::{synthesize_twin, Advection, ModelParams};
use crate::inverse::{fixed_point_solve, FixedPointConfig, ProblemSetup};
use crate::memory::{
    check_time_primitive_bound, check_young_bound, convolve_field, convolve_scalar, split_convolution, KernelSpec,
    KernelTrace,
};
use crate::presets::preset;
use crate::spectral::{Grid, PressureField, SpectralField, Trajectory};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

/// Random real field with coefficients on `|ξ_i| ≤ max_mode`, not projected.
pub fn random_field(grid: &Arc<Grid>, rng: &mut impl Rng, max_mode: i64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    let dim = grid.dim();
    let mut xi = vec![0i64; dim];
    let count = (2 * max_mode + 1).pow(dim as u32);
    for code in 0..count {
        let mut c = code;
        for x in xi.iter_mut() {
            *x = c % (2 * max_mode + 1) - max_mode;
            c /= 2 * max_mode + 1;
        }
        // one representative per conjugate pair
        let first_nonzero = xi.iter().find(|v| **v != 0).copied();
        if !matches!(first_nonzero, Some(v) if v > 0) {
            continue;
        }
        let value: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        f.set_mode(&xi, &value).expect("mode on grid");
    }
    f
}

pub fn operator_suite(dim: usize, n: usize, count: usize, seed: u64) -> Vec<Check> {
    let grid = Grid::new(dim, n).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dealiased = (n as i64) / 3;
    let (mut idem, mut div, mut grad, mut helm, mut skew) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..count {
        let f = random_field(&grid, &mut rng, n as i64 / 2 - 1);
        let norm = f.sobolev_norm(0.0);
        let p = f.leray_project();
        idem = idem.max((&p.leray_project() - &p).sobolev_norm(0.0) / norm);
        div = div.max(p.max_divergence() / norm);
        let s = random_field(&grid, &mut rng, n as i64 / 2 - 1);
        let s = PressureField::from_coeffs(&grid, s.component(0).to_vec()).expect("scalar");
        let g = s.gradient();
        grad = grad.max(g.leray_project().sobolev_norm(0.0) / g.sobolev_norm(0.0).max(1e-300));
        let mu1 = rng.gen_range(0.0..2.0);
        helm = helm.max((&f.apply_helmholtz(mu1).helmholtz_inverse(mu1) - &f).sobolev_norm(0.0) / norm);
        let a = random_field(&grid, &mut rng, dealiased).leray_project();
        let b = random_field(&grid, &mut rng, dealiased).leray_project();
        let mut ab = a.advect_raw(&b).expect("same grid");
        ab.dealias();
        let value = ab.l2_inner(&b).abs();
        let scale = a.sobolev_norm(1.0) * b.sobolev_norm(1.0).powi(2);
        skew = skew.max(value / scale);
    }
    let tag = |s: &str| format!("{s} ({dim}D N={n})");
    vec![
        check(&tag("projection idempotent"), idem <= 1e-12, format!("max relative defect {idem:e}")),
        check(&tag("projection divergence-free"), div <= 1e-12, format!("max |xi.Pf| / |f| = {div:e}")),
        check(&tag("gradients annihilated"), grad <= 1e-12, format!("max |P grad s| / |grad s| = {grad:e}")),
        check(&tag("helmholtz round trip"), helm <= 1e-12, format!("max relative defect {helm:e}")),
        check(&tag("advection skew-symmetric"), skew <= 1e-10, format!("max |<(a.grad)b, b>| / scale = {skew:e}")),
    ]
}

pub fn quadrature_suite(count: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1e-2;
    let steps = 100;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let k = KernelTrace::new(dt, (0..=steps).map(|_| rng.gen_range(0.0..1.0)).collect()).expect("finite");
        let f: Vec<f64> = (0..=steps).map(|_| rng.gen_range(0.0..1.0)).collect();
        worst = worst.max(check_young_bound(&k, &f).expect("lengths").ratio);
    }
    let z: Vec<f64> = (0..=steps).map(|i| (i as f64 * dt).sin()).collect();
    let prim = check_time_primitive_bound(&z, dt).expect("z(0) = 0");

    let err = |m: usize| {
        let h = 1.0 / m as f64;
        let k = KernelTrace::from_fn(h, m, |t| (-t).exp()).expect("finite");
        let f: Vec<f64> = (0..=m).map(|i| 1.0 - (-(i as f64) * h).exp()).collect();
        // ∫₀¹ e^{-(1-s)}(1 - e^{-s}) ds = 1 - e^{-1} - e^{-1}
        let approx = convolve_scalar(&k, &f, m).expect("lengths");
        (approx - (1.0 - 2.0 * (-1.0f64).exp())).abs()
    };
    let order = (err(50) / err(100)).log2();

    let grid = Grid::new(2, 8).expect("valid grid");
    let base = preset(&grid, "shear", 1.0).expect("preset");
    let m = 40;
    let v_hat = Trajectory::new(dt, (0..=m).map(|i| base.scaled((0.3 * i as f64 * dt).cos())).collect()).expect("grid");
    let d = 20;
    let full = Trajectory::new(dt, (0..=m + d).map(|i| base.scaled((0.3 * i as f64 * dt).cos())).collect()).expect("grid");
    let v_tau = full.window(m, m + d).expect("window");
    let kfull = KernelTrace::from_fn(dt, m + d, |t| 0.5 * (-0.5 * t).exp()).expect("finite");
    let k_hat = kfull.window(0, m).expect("window");
    let k_tau = kfull.window(m, m + d).expect("window");
    let mut split_err = 0.0f64;
    for j in 0..=d {
        let s = split_convolution(&k_hat, &k_tau, &v_hat, &v_tau, j).expect("split");
        let mono = convolve_field(&kfull, &full, m + j).expect("mono");
        split_err = split_err.max((&s - &mono).max_abs());
    }
    let bound = 2.0 * dt * 0.5 * base.max_abs();
    vec![
        check("young bound", worst <= 1.0 + 5.0 * dt, format!("max ratio {worst:.4} over {count} inputs")),
        check(
            "time-primitive bounds",
            prim.sup_ratio <= 1.0 + 5.0 * dt && prim.l2_ratio <= 1.0 + 5.0 * dt,
            format!("sup ratio {:.4}, L2 ratio {:.4}", prim.sup_ratio, prim.l2_ratio),
        ),
        check("convolution order", order >= 1.9, format!("observed order {order:.3}")),
        check("split identity", split_err <= bound, format!("max deviation {split_err:e} (bound {bound:e})")),
    ]
}

pub fn solver_suite() -> Vec<Check> {
    let grid = Grid::new(2, 8).expect("valid grid");
    let u0 = preset(&grid, "mixed", 1.0).expect("preset");
    let phi = preset(&grid, "probe", 1.0).expect("preset");
    let w = preset(&grid, "taylor_green", 1.0).expect("preset");
    let dt = 0.01;
    let params = ModelParams::new(
        1.5,
        1.0,
        KernelSpec::Exponential {
            gamma: 0.5,
            delta: 0.5,
        },
        Advection::Oseen(w),
    )
    .expect("valid params");
    let result = synthesize_twin(&u0, &phi, &params, 0.2, dt, 1).and_then(|twin| {
        let setup = ProblemSetup::new(params.clone(), u0.clone(), phi.clone(), twin.measurement.clone())?;
        let res = fixed_point_solve(&setup, &FixedPointConfig::new(0.2, dt))?;
        let diff: Vec<f64> = res.k.samples().iter().zip(twin.k_true.samples()).map(|(a, b)| a - b).collect();
        Ok((res, crate::memory::time_l2_norm(&diff, dt) / twin.k_true.l2_norm()))
    });
    match result {
        Ok((res, rel)) => vec![
            check(
                "oseen twin",
                res.converged && rel < 1e-6,
                format!("{} iterations, relative kernel error {rel:e}", res.iterations),
            ),
            check(
                "contraction",
                res.contraction_ratios.iter().all(|r| *r < 1.0),
                format!("max ratio {:.3}", res.max_ratio()),
            ),
        ],
        Err(e) => vec![check("oseen twin", false, e.to_string())],
    }
}

pub fn run_all() -> Vec<Check> {
    let mut out = operator_suite(2, 16, 100, 1);
    out.extend(operator_suite(3, 8, 20, 2));
    out.extend(quadrature_suite(100, 3));
    out.extend(solver_suite());
    out
}
