//! Named divergence-free fields for initial data, probes and base flows.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

pub const NAMES: &[&str] = &["zero", "shear", "taylor_green", "mixed", "probe", "cellular", "abc"];

fn raw(name: &str, x: &[f64]) -> Option<[f64; 3]> {
    let (x1, x2) = (x[0], x[1]);
    let x3 = x.get(2).copied().unwrap_or(0.0);
    Some(match name {
        "zero" => [0.0; 3],
        "shear" => [x2.sin(), 0.0, 0.0],
        "taylor_green" => [x1.sin() * x2.cos(), -x1.cos() * x2.sin(), 0.0],
        "mixed" => [
            x1.sin() * x2.cos() + 0.5 * (2.0 * x2).sin(),
            -x1.cos() * x2.sin() + 0.3 * x1.cos(),
            0.2 * (x1 + x2).sin(),
        ],
        "probe" => [x2.sin() + (2.0 * x2).sin(), x1.cos(), 0.0],
        "cellular" => [x2.cos(), x1.sin(), 0.0],
        "abc" => [x3.sin() + x2.cos(), x1.sin() + x3.cos(), x2.sin() + x1.cos()],
        _ => return None,
    })
}

/// Preset `name` scaled by `amplitude`, Leray-projected.
pub fn preset(grid: &Arc<Grid>, name: &str, amplitude: f64) -> Result<SpectralField> {
    if raw(name, &[0.0; 3]).is_none() {
        return Err(Error::Config(format!(
            "unknown field preset '{name}' (known: {})",
            NAMES.join(", ")
        )));
    }
    if name == "abc" && grid.dim() != 3 {
        return Err(Error::Config("preset 'abc' needs dim = 3".into()));
    }
    let f = SpectralField::from_fn(grid, |x| raw(name, x).expect("checked above"));
    Ok(f.leray_project().scaled(amplitude))
}
