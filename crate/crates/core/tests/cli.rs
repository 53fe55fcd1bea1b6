use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kvinverse"))
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn kv(kernel: &str, fields: &str) -> String {
    format!(
        r#"{{
  "mode": "kv",
  "grid": {{ "dim": 2, "n": 8 }},
  "model": {{ "mu0": 1.5, "mu1": 1.0 }},
  "kernel": {kernel},
  "fields": {fields},
  "time": {{ "t_end": 0.1, "dt": 0.01, "tau": 0.1 }},
  "io": {{ "output_dir": "out" }}
}}"#
    )
}

const FIELDS: &str = r#"{ "u0": { "preset": "mixed" }, "phi": { "preset": "probe" } }"#;
const EXP: &str = r#"{ "type": "exponential", "gamma": 0.5, "delta": 0.5 }"#;

fn run(cmd: &mut Command) -> (Option<i32>, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code(),
        String::from_utf8_lossy(&stdout).into_owned(),
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

#[test]
fn twin_with_zero_kernel_recovers_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &kv(r#"{ "type": "zero" }"#, FIELDS));
    let (code, stdout, stderr) = run(bin().arg("twin").arg("--config").arg(&cfg));
    assert_eq!(code, Some(0), "{stderr}");
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(report["kernel_l2"].as_f64().unwrap() <= 1e-6);
    assert!(dir.path().join("out/kernel.csv").exists());
    assert!(dir.path().join("out/twin_report.json").exists());
}

#[test]
fn forward_then_invert_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &kv(EXP, FIELDS));
    let (code, _, stderr) = run(bin().arg("forward").arg("--config").arg(&cfg).arg("--dump-trajectory"));
    assert_eq!(code, Some(0), "{stderr}");
    let out = dir.path().join("out");
    for f in ["measurement.csv", "kernel_true.csv", "forward_summary.json", "velocity.bin", "velocity.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m = out.join("measurement.csv");
    let mut kernels = Vec::new();
    for sub in ["a", "b"] {
        let target = dir.path().join(sub);
        let (code, stdout, stderr) = run(bin()
            .arg("--verbose")
            .arg("invert")
            .arg("--config")
            .arg(&cfg)
            .arg("--measurement")
            .arg(&m)
            .arg("--out")
            .arg(&target));
        assert_eq!(code, Some(0), "{stderr}");
        let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(report["converged"], true);
        let lines: Vec<serde_json::Value> = stderr.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len() as u64, report["iterations"].as_u64().unwrap());
        kernels.push(std::fs::read(target.join("kernel.csv")).unwrap());
    }
    assert_eq!(kernels[0], kernels[1]);

    let k = kvinverse::io::read_kernel_csv(&dir.path().join("a/kernel.csv")).unwrap();
    let truth = kvinverse::io::read_kernel_csv(&out.join("kernel_true.csv")).unwrap();
    assert!(kvinverse::memory::relative_l2_error(&k, &truth).unwrap() < 1e-6);
}

#[test]
fn check_names_a3() {
    let dir = tempfile::tempdir().unwrap();
    let fields = r#"{ "u0": { "preset": "shear" }, "phi": { "preset": "cellular" } }"#;
    let cfg = config(dir.path(), "c.json", &kv(EXP, fields));
    let (code, stdout, stderr) = run(bin().arg("check").arg("--config").arg(&cfg));
    assert_eq!(code, Some(3));
    assert!(stderr.contains("assumptions violated: A3"), "{stderr}");
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn twin_with_orthogonal_probe_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let fields = r#"{ "u0": { "preset": "shear" }, "phi": { "preset": "cellular" } }"#;
    let cfg = config(dir.path(), "c.json", &kv(EXP, fields));
    let (code, _, stderr) = run(bin().arg("twin").arg("--config").arg(&cfg));
    assert_eq!(code, Some(3), "{stderr}");
    assert!(stderr.contains("A3"));
}

#[test]
fn oseen_with_divergent_base_flow_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("w.json"),
        r#"{"modes":[{"xi":[1,0],"coeffs":[[0.0,-0.5],[0.0,0.0]]}]}"#,
    )
    .unwrap();
    let body = kv(
        EXP,
        r#"{ "u0": { "preset": "mixed" }, "phi": { "preset": "probe" }, "u_inf": { "file": "w.json" } }"#,
    )
    .replace(r#""mode": "kv""#, r#""mode": "oseen""#);
    let cfg = config(dir.path(), "c.json", &body);
    let (code, _, stderr) = run(bin().arg("check").arg("--config").arg(&cfg));
    assert_eq!(code, Some(3), "{stderr}");
    assert!(stderr.contains("H4"), "{stderr}");
}

#[test]
fn io_and_config_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &kv(EXP, FIELDS));
    let missing = dir.path().join("nope.csv");
    let (code, _, stderr) = run(bin().arg("invert").arg("--config").arg(&cfg).arg("--measurement").arg(&missing));
    assert_eq!(code, Some(4));
    assert!(stderr.starts_with("error:"));

    let bad = config(dir.path(), "bad.json", &kv(EXP, FIELDS).replace("\"mu0\": 1.5", "\"mu0\": 1.5, \"lambda\": 2.0"));
    let (code, _, _) = run(bin().arg("check").arg("--config").arg(&bad));
    assert_eq!(code, Some(4));

    let (code, _, _) = run(bin().arg("check").arg("--config").arg(dir.path().join("absent.json")));
    assert_eq!(code, Some(4));
}

#[test]
fn march_on_kv_is_flagged_experimental() {
    let dir = tempfile::tempdir().unwrap();
    let body = kv(EXP, FIELDS).replace(r#""t_end": 0.1"#, r#""t_end": 0.2"#);
    let cfg = config(dir.path(), "c.json", &body);
    let (code, _, stderr) = run(bin().arg("forward").arg("--config").arg(&cfg));
    assert_eq!(code, Some(0), "{stderr}");
    let m = dir.path().join("out/measurement.csv");
    let (code, stdout, stderr) = run(bin().arg("march").arg("--config").arg(&cfg).arg("--measurement").arg(&m));
    assert!(stderr.contains("experimental"));
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["experimental"], true);
    assert_eq!(code, Some(if report["completed"] == true { 0 } else { 2 }));
}

#[test]
fn selftest_passes() {
    let (code, stdout, _) = run(bin().arg("selftest"));
    assert_eq!(code, Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
}
