//! CSV traces, JSON reports, field coefficient files and trajectory dumps.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! written trace reads back bit-identically.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::MeasurementTrace;
use crate::memory::KernelTrace;
use crate::spectral::{Grid, SpectralField, Trajectory};

const UNIFORM_RTOL: f64 = 1e-9;

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

pub fn write_kernel_csv(path: &Path, k: &KernelTrace) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "k"])?;
    for (t, v) in k.times().iter().zip(k.samples()) {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_kernel_csv(path: &Path) -> Result<KernelTrace> {
    let (header, rows) = read_table(path)?;
    if header != ["t", "k"] {
        return Err(Error::InvalidInput(format!("{}: expected header t,k, found {header:?}", path.display())));
    }
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let dt = uniform_step(&t)?;
    KernelTrace::new(dt, rows.iter().map(|r| r[1]).collect())
}

pub fn write_measurement_csv(path: &Path, m: &MeasurementTrace) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "r", "rp", "rpp"])?;
    for (i, t) in m.times().iter().enumerate() {
        w.write_record([t.to_string(), m.r[i].to_string(), m.r1[i].to_string(), m.r2[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("{}: row {}: bad number '{s}'", path.display(), line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::InvalidInput(format!("{}: row {} has {} fields", path.display(), line + 1, row.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::InvalidInput("need at least two time samples".into()));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput("time column must increase".into()));
    }
    for (i, pair) in t.windows(2).enumerate() {
        let step = pair[1] - pair[0];
        if (step - dt).abs() > UNIFORM_RTOL.max(1e-12) * dt.max(t[t.len() - 1].abs()) {
            return Err(Error::InvalidInput(format!("non-uniform time grid at row {}", i + 1)));
        }
    }
    if t[0].abs() > UNIFORM_RTOL * dt {
        return Err(Error::InvalidInput(format!("time column must start at 0, found {}", t[0])));
    }
    Ok(dt)
}

/// Read `t,r[,rp[,rpp]]`. Missing derivative columns are computed by
/// centered differences with second-order one-sided ends, or, with
/// `smoothing = Some(w)`, by least-squares quadratics over `2w+1` samples.
pub fn ingest_measurement(path: &Path, smoothing: Option<usize>) -> Result<MeasurementTrace> {
    let (header, rows) = read_table(path)?;
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let ncol = match cols.as_slice() {
        ["t", "r"] => 1,
        ["t", "r", "rp"] => 2,
        ["t", "r", "rp", "rpp"] => 3,
        _ => {
            return Err(Error::InvalidInput(format!(
                "{}: expected header t,r[,rp[,rpp]], found {cols:?}",
                path.display()
            )))
        }
    };
    if rows.len() < 4 {
        return Err(Error::InvalidInput(format!("{}: need at least 4 samples, found {}", path.display(), rows.len())));
    }
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let dt = uniform_step(&t)?;
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<f64>>();
    let r = col(1);
    let derive = |x: &[f64]| match smoothing {
        Some(w) if w > 0 => local_quadratic(x, dt, w).0,
        _ => first_difference(x, dt),
    };
    let (r1, r2) = match ncol {
        3 => (col(2), col(3)),
        2 => {
            let r1 = col(2);
            let r2 = derive(&r1);
            (r1, r2)
        }
        _ => match smoothing {
            Some(w) if w > 0 => local_quadratic(&r, dt, w),
            _ => (first_difference(&r, dt), second_difference(&r, dt)),
        },
    };
    MeasurementTrace::new(dt, r, r1, r2)
}

/// Centered first difference, three-point one-sided at the ends.
pub fn first_difference(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt)
            } else if i == n - 1 {
                (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt)
            } else {
                (x[i + 1] - x[i - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// Centered second difference, four-point one-sided at the ends.
pub fn second_difference(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    let h2 = dt * dt;
    (0..n)
        .map(|i| {
            if i == 0 {
                (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) / h2
            } else if i == n - 1 {
                (2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) / h2
            } else {
                (x[i + 1] - 2.0 * x[i] + x[i - 1]) / h2
            }
        })
        .collect()
}

/// First and second derivatives from least-squares quadratics over
/// `2w+1` neighbours (window shifted inward at the ends).
pub fn local_quadratic(x: &[f64], dt: f64, w: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let w = w.min((n - 1) / 2).max(1);
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(w).min(n - 1 - 2 * w);
        let hi = lo + 2 * w;
        // moments of s = (j − i)·dt
        let mut m = [0.0f64; 5];
        let mut b = [0.0f64; 3];
        for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
            let s = (j as f64 - i as f64) * dt;
            let mut p = 1.0;
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += p;
                if k < 3 {
                    b[k] += p * xj;
                }
                p *= s;
            }
        }
        let a = [[m[0], m[1], m[2]], [m[1], m[2], m[3]], [m[2], m[3], m[4]]];
        let c = solve3(a, b);
        d1.push(c[1]);
        d2.push(2.0 * c[2]);
    }
    (d1, d2)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ModeEntry {
    xi: Vec<i64>,
    coeffs: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    modes: Vec<ModeEntry>,
}

/// Read a field from `{"modes": [{"xi": [1, 0], "coeffs": [[re, im], ...]}]}`.
/// Each entry also sets the conjugate mode at `−ξ`. No projection is
/// applied.
pub fn read_field_file(grid: &Arc<Grid>, path: &Path) -> Result<SpectralField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let doc: FieldFile = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut f = SpectralField::zeros(grid);
    for entry in &doc.modes {
        if entry.xi.len() != grid.dim() || entry.coeffs.len() != grid.dim() {
            return Err(Error::Config(format!(
                "{}: mode {:?} needs {} wavevector entries and coefficients",
                path.display(),
                entry.xi,
                grid.dim()
            )));
        }
        let value: Vec<Complex64> = entry.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        f.set_mode(&entry.xi, &value).map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(f)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TrajectorySidecar {
    pub dim: usize,
    pub modes_per_axis: usize,
    pub components: usize,
    pub samples: usize,
    pub dt: f64,
    pub dtype: String,
    pub layout: String,
}

/// Dump `traj` to `<stem>.bin` (little-endian `(re, im)` f64 pairs) and
/// `<stem>.json`. Returns both paths.
pub fn write_trajectory(stem: &Path, traj: &Trajectory) -> Result<(PathBuf, PathBuf)> {
    let bin = stem.with_extension("bin");
    let json = stem.with_extension("json");
    ensure_parent(&bin)?;
    let mut w = BufWriter::new(File::create(&bin)?);
    for f in traj.fields() {
        for c in f.coeffs() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    let g = traj.grid();
    let sidecar = TrajectorySidecar {
        dim: g.dim(),
        modes_per_axis: g.modes_per_axis(),
        components: g.dim(),
        samples: traj.len(),
        dt: traj.dt(),
        dtype: "complex128-le".into(),
        layout: "sample, component, mode; modes row-major over axes in FFT order".into(),
    };
    write_json(&json, &sidecar)?;
    Ok((bin, json))
}

pub fn read_trajectory(stem: &Path) -> Result<Trajectory> {
    let sidecar: TrajectorySidecar = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    let grid = Grid::new(sidecar.dim, sidecar.modes_per_axis)?;
    let bytes = std::fs::read(stem.with_extension("bin"))?;
    let per = sidecar.components * grid.size();
    if bytes.len() != 16 * per * sidecar.samples {
        return Err(Error::LengthMismatch {
            expected: 16 * per * sidecar.samples,
            found: bytes.len(),
        });
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let fields = values
        .chunks_exact(per)
        .map(|c| SpectralField::from_coeffs(&grid, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(sidecar.dt, fields)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_column_gives_exact_derivatives() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "t,r").unwrap();
        for i in 0..11 {
            let t = i as f64 * 0.1;
            writeln!(f, "{t},{}", t * t).unwrap();
        }
        drop(f);
        let m = ingest_measurement(&path, None).unwrap();
        for (i, (r1, r2)) in m.r1.iter().zip(&m.r2).enumerate() {
            assert!((r2 - 2.0).abs() < 1e-9, "{i}: {r2}");
            assert!((r1 - 2.0 * i as f64 * 0.1).abs() < 1e-9);
        }
        let (d1, d2) = local_quadratic(&m.r, 0.1, 2);
        assert!(d2.iter().all(|v| (v - 2.0).abs() < 1e-8));
        assert!((d1[0]).abs() < 1e-9);
    }

    #[test]
    fn measurement_roundtrip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = MeasurementTrace::new(
            1e-3,
            vec![0.1, 1.0 / 3.0, std::f64::consts::PI, -2.5e-17],
            vec![1e300, -0.0, 7.0, 1.0 / 7.0],
            vec![0.0, 2.0f64.sqrt(), -1e-300, 5.0],
        )
        .unwrap();
        write_measurement_csv(&path, &m).unwrap();
        let back = ingest_measurement(&path, None).unwrap();
        assert_eq!(back.r, m.r);
        assert_eq!(back.r1, m.r1);
        assert_eq!(back.r2, m.r2);
    }

    #[test]
    fn rejects_short_and_nonuniform_files() {
        let dir = tempfile::tempdir().unwrap();
        let short = dir.path().join("s.csv");
        std::fs::write(&short, "t,r\n0,1\n0.1,2\n0.2,3\n").unwrap();
        assert!(ingest_measurement(&short, None).is_err());
        let bad = dir.path().join("b.csv");
        std::fs::write(&bad, "t,r\n0,1\n0.1,2\n0.25,3\n0.3,4\n").unwrap();
        assert!(matches!(ingest_measurement(&bad, None), Err(Error::InvalidInput(_))));
        let header = dir.path().join("h.csv");
        std::fs::write(&header, "time,r\n0,1\n0.1,2\n0.2,3\n0.3,4\n").unwrap();
        assert!(ingest_measurement(&header, None).is_err());
    }

    #[test]
    fn kernel_and_trajectory_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let k = KernelTrace::from_fn(0.01, 20, |t| 0.5 * (-0.5 * t).exp()).unwrap();
        let kp = dir.path().join("k.csv");
        write_kernel_csv(&kp, &k).unwrap();
        assert_eq!(read_kernel_csv(&kp).unwrap(), k);

        let g = Grid::new(2, 8).unwrap();
        let f = SpectralField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), 0.0]);
        let traj = Trajectory::new(0.1, vec![f.clone(), f.scaled(0.5)]).unwrap();
        let stem = dir.path().join("traj");
        write_trajectory(&stem, &traj).unwrap();
        let back = read_trajectory(&stem).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.fields()[1].coeffs(), traj.fields()[1].coeffs());
    }

    #[test]
    fn field_file_sets_conjugate_pairs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        std::fs::write(&path, r#"{"modes": [{"xi": [0, 1], "coeffs": [[0, -0.5], [0, 0]]}]}"#).unwrap();
        let g = Grid::new(2, 8).unwrap();
        let f = read_field_file(&g, &path).unwrap();
        let direct = SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!((&f - &direct).max_abs() < 1e-15);
    }
}
