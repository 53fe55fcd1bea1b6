use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use kvinverse::config::{parse_config, RunConfig};
use kvinverse::continuation::{march_global, MarchResult};
use kvinverse::forward::{run_direct, synthesize_twin, MeasurementTrace};
use kvinverse::inverse::{
    check_assumptions, fixed_point_solve_with, initial_measurement, reconstruct_u, residual_check, FixedPointResult,
    IterationRecord, ProblemSetup,
};
use kvinverse::io::{ingest_measurement, write_json, write_kernel_csv, write_measurement_csv, write_trajectory};
use kvinverse::memory::relative_l2_error;
use kvinverse::{selftest, Error, Result};

#[derive(Parser)]
#[command(name = "kvinverse", version, about = "Memory-kernel reconstruction for Kelvin-Voigt flows")]
struct Cli {
    /// Stream per-iteration diagnostics to stderr as JSON lines.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `io.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the direct problem with the configured kernel.
    Forward {
        #[command(flatten)]
        common: Common,
        /// Also write the velocity trajectory as raw binary plus sidecar.
        #[arg(long)]
        dump_trajectory: bool,
    },
    /// Reconstruct the kernel on [0, tau] from a measurement file.
    Invert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        measurement: PathBuf,
    },
    /// Synthesize data with the configured kernel, invert it and report the error.
    Twin {
        #[command(flatten)]
        common: Common,
        /// March over [0, T] instead of a single window.
        #[arg(long)]
        march: bool,
    },
    /// Window-by-window reconstruction over [0, T].
    March {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        measurement: PathBuf,
    },
    /// Report on the data assumptions only.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        measurement: Option<PathBuf>,
    },
    /// Run the built-in invariant suites.
    Selftest,
}

enum Outcome {
    Done,
    NotConverged,
    AssumptionFailed,
    SelftestFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(2),
        Ok(Outcome::AssumptionFailed) => ExitCode::from(3),
        Ok(Outcome::SelftestFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Diverged { .. } => 2,
        Error::Assumption(_) | Error::AlphaFloor { .. } => 3,
        _ => 4,
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Forward {
            common,
            dump_trajectory,
        } => forward(&common, dump_trajectory),
        Command::Invert { common, measurement } => invert(&common, &measurement, verbose),
        Command::Twin { common, march } => twin(&common, march, verbose),
        Command::March { common, measurement } => march(&common, &measurement, verbose),
        Command::Check { common, measurement } => check(&common, measurement.as_deref()),
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) {
                Outcome::Done
            } else {
                Outcome::SelftestFailed
            })
        }
    }
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let cfg = parse_config(&common.config)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

fn setup_for(cfg: &RunConfig, measurement: MeasurementTrace) -> Result<ProblemSetup> {
    let mut setup = ProblemSetup::new(cfg.model_params()?, cfg.u0.clone(), cfg.phi.clone(), measurement)?;
    setup.alpha_floor = cfg.solver.alpha_floor;
    setup.compat_tol = cfg.solver.compat_tol;
    Ok(setup)
}

fn printer(verbose: bool) -> impl FnMut(&IterationRecord) {
    move |rec| {
        if verbose {
            if let Ok(line) = serde_json::to_string(rec) {
                eprintln!("{line}");
            }
        }
    }
}

/// Writes the report and prints it to stdout.
fn emit(path: &Path, report: &serde_json::Value) -> Result<()> {
    write_json(path, report)?;
    println!("{}", serde_json::to_string_pretty(report)?);
    Ok(())
}

fn forward(common: &Common, dump: bool) -> Result<Outcome> {
    let (cfg, out) = load(common)?;
    let params = cfg.model_params()?;
    let run = run_direct(&cfg.u0, &params, cfg.t_end, cfg.dt, &cfg.phi)?;
    write_measurement_csv(&out.join("measurement.csv"), &run.measurement)?;
    write_kernel_csv(&out.join("kernel_true.csv"), &run.kernel)?;
    if dump {
        write_trajectory(&out.join("velocity"), &run.u)?;
    }
    let energy: Vec<f64> = run.u.fields().iter().map(|u| u.sobolev_norm(0.0)).collect();
    let max_div = run.u.fields().iter().map(|u| u.max_divergence()).fold(0.0, f64::max);
    let report = json!({
        "mode": cfg.mode,
        "steps": run.u.steps(),
        "dt": cfg.dt,
        "t_end": run.u.duration(),
        "l2_norm_initial": energy.first(),
        "l2_norm_final": energy.last(),
        "h2_norm_final": run.u.last().sobolev_norm(2.0),
        "max_divergence": max_div,
        "r_final": run.measurement.r.last(),
    });
    emit(&out.join("forward_summary.json"), &report)?;
    Ok(Outcome::Done)
}

fn solve_report(setup: &ProblemSetup, res: &FixedPointResult) -> serde_json::Value {
    json!({
        "converged": res.converged,
        "iterations": res.iterations,
        "tau": res.tau,
        "restarts": res.restarts,
        "contraction_ratios": res.contraction_ratios,
        "deltas": res.deltas,
        "l_estimates": res.l_history,
        "kernel_l2": res.k.l2_norm(),
        "alpha_inv": setup.alpha_inv(),
        "residuals": res.residuals,
    })
}

fn gate(setup: &ProblemSetup, out: &Path) -> Result<bool> {
    let report = check_assumptions(setup);
    if !report.passed() {
        write_json(&out.join("diagnostics.json"), &json!({ "assumptions": report }))?;
        eprintln!("assumptions violated: {}", report.failures().join(", "));
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("  {}: {}", c.name, c.detail);
        }
        return Ok(false);
    }
    Ok(true)
}

fn invert(common: &Common, measurement: &Path, verbose: bool) -> Result<Outcome> {
    let (cfg, out) = load(common)?;
    let data = ingest_measurement(measurement, cfg.solver.smoothing)?;
    let setup = setup_for(&cfg, data)?;
    if !gate(&setup, &out)? {
        return Ok(Outcome::AssumptionFailed);
    }
    let mut obs = printer(verbose);
    let res = fixed_point_solve_with(&setup, &cfg.solver.fixed_point, None, Some(&mut obs))?;
    write_kernel_csv(&out.join("kernel.csv"), &res.k)?;
    let mut report = solve_report(&setup, &res);
    report["assumptions"] = serde_json::to_value(check_assumptions(&setup))?;
    emit(&out.join("diagnostics.json"), &report)?;
    Ok(if res.converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

fn march_report(res: &MarchResult) -> serde_json::Value {
    json!({
        "completed": res.completed,
        "failure": res.failure,
        "experimental": res.experimental,
        "t_reached": res.t_reached(),
        "monitor_ratio": res.monitor_ratio(),
        "max_junction_jump": res.max_junction_jump(),
        "kernel_l2": res.k.l2_norm(),
        "windows": res.windows,
        "junctions": res.junctions,
    })
}

fn march(common: &Common, measurement: &Path, verbose: bool) -> Result<Outcome> {
    let (cfg, out) = load(common)?;
    let data = ingest_measurement(measurement, cfg.solver.smoothing)?;
    let setup = setup_for(&cfg, data)?;
    if !gate(&setup, &out)? {
        return Ok(Outcome::AssumptionFailed);
    }
    let mut obs = printer(verbose);
    let res = march_global(&setup, &cfg.solver.fixed_point, cfg.t_end, Some(&mut obs))?;
    if res.experimental {
        eprintln!("warning: continuation of the nonlinear model is experimental");
    }
    write_kernel_csv(&out.join("kernel.csv"), &res.k)?;
    emit(&out.join("diagnostics.json"), &march_report(&res))?;
    Ok(if res.completed {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

fn twin(common: &Common, global: bool, verbose: bool) -> Result<Outcome> {
    let (cfg, out) = load(common)?;
    let params = cfg.model_params()?;
    let t_end = if global { cfg.t_end } else { cfg.tau };
    let data = synthesize_twin(&cfg.u0, &cfg.phi, &params, t_end, cfg.dt, cfg.twin_refinement)?;
    write_measurement_csv(&out.join("measurement.csv"), &data.measurement)?;
    write_kernel_csv(&out.join("kernel_true.csv"), &data.k_true)?;
    let setup = setup_for(&cfg, data.measurement.clone())?;
    if !gate(&setup, &out)? {
        return Ok(Outcome::AssumptionFailed);
    }
    let mut obs = printer(verbose);
    let (k, converged, mut report) = if global {
        let res = march_global(&setup, &cfg.solver.fixed_point, t_end, Some(&mut obs))?;
        let mut report = march_report(&res);
        let u = reconstruct_u(&res.v, &cfg.u0)?;
        report["residuals"] = serde_json::to_value(residual_check(&u, &res.k, &setup)?)?;
        (res.k, res.completed, report)
    } else {
        let res = fixed_point_solve_with(&setup, &cfg.solver.fixed_point, None, Some(&mut obs))?;
        let report = solve_report(&setup, &res);
        (res.k, res.converged, report)
    };
    write_kernel_csv(&out.join("kernel.csv"), &k)?;
    let err = relative_l2_error(&k, &data.k_true)?;
    report["refinement"] = json!(cfg.twin_refinement);
    report["true_kernel_l2"] = json!(data.k_true.window(0, k.steps())?.l2_norm());
    report["relative_kernel_error"] = json!(err);
    emit(&out.join("twin_report.json"), &report)?;
    Ok(if converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

fn check(common: &Common, measurement: Option<&Path>) -> Result<Outcome> {
    let (cfg, out) = load(common)?;
    let (data, derived) = match measurement {
        Some(path) => (ingest_measurement(path, cfg.solver.smoothing)?, false),
        None => (MeasurementTrace::new(cfg.dt, vec![0.0], vec![0.0], vec![0.0])?, true),
    };
    let mut setup = setup_for(&cfg, data)?;
    if derived {
        let (r0, r1) = initial_measurement(&setup)?;
        setup.measurement = MeasurementTrace::new(cfg.dt, vec![r0], vec![r1], vec![0.0])?;
    }
    let report = check_assumptions(&setup);
    let passed = report.passed();
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if !passed {
        eprintln!("assumptions violated: {}", report.failures().join(", "));
    }
    let value = json!({
        "passed": passed,
        "measurement": if derived { "derived from initial data" } else { "file" },
        "assumptions": report,
    });
    emit(&out.join("check.json"), &value)?;
    Ok(if passed {
        Outcome::Done
    } else {
        Outcome::AssumptionFailed
    })
}
