//! `vqederiv`: VQE optimization, energy derivatives, Taylor scans, Euler
//! continuation, excited levels and finite-difference validation from the
//! command line.
//!
//! Worker count for parallel stages follows `RAYON_NUM_THREADS`.

mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use vqederiv::data::{MODEL_HAMILTONIAN_JSON, Y_ROTATION_ANSATZ_JSON};
use vqederiv::excited::vqd_optimize as vqd;
use vqederiv::seed::derive_named;
use vqederiv::{
    continuation_scan, derivatives, excited_derivatives, fd_validate, optimize, AssemblyConfig, Backend, BackendKind, Circuit, Error,
    GuardMode, HamiltonianFamily, OptimizerConfig, ScanConfig, TaylorPes,
};

use manifest::{InputRecord, RunManifest};

const EXIT_IO: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_NOT_STATIONARY: u8 = 5;
const EXIT_NUMERICAL: u8 = 6;
const EXIT_VALIDATION: u8 = 7;

#[derive(Parser)]
#[command(name = "vqederiv", version, about = "VQE energies and their derivatives with respect to Hamiltonian parameters")]
struct Cli {
    /// Master seed; optimizer and shot sampling seeds are derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time per stage in the manifest (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timings: bool,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the ansatz at x and write theta*.
    Optimize {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Energy derivatives with respect to x at an optimum.
    Derive {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        theta: ThetaArgs,
        #[command(flatten)]
        deriv: DeriveArgs,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Per-point VQE energies next to harmonic and cubic expansions.
    Pes {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        theta: ThetaArgs,
        #[command(flatten)]
        deriv: DeriveArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// Expansion point; defaults to --from.
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
    },
    /// Euler continuation of theta* along a line in x.
    Euler {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        theta: ThetaArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        to: Vec<f64>,
        #[arg(long)]
        step: f64,
        /// Re-optimize every K steps.
        #[arg(long)]
        reopt_every: Option<usize>,
    },
    /// Penalty-deflated excited level and its derivatives.
    Excited {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        deriv: DeriveArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        level: usize,
        /// One penalty weight per level 0..=level.
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
        drop_inner_products: bool,
    },
    /// Compare analytical derivatives with finite differences of re-optimized energies.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        theta: ThetaArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, default_value_t = 1e-3)]
        fd_step: f64,
        /// Fail with exit code 7 when the largest absolute difference exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Hamiltonian family JSON; the bundled one-qubit model when absent.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Ansatz circuit JSON; the bundled single R_y rotation when absent.
    #[arg(long)]
    ansatz: Option<PathBuf>,
    /// Comma-separated x values; zeros when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Option<Vec<f64>>,
}

#[derive(Args)]
struct ThetaArgs {
    /// Optimal parameters, comma-separated. Used as given, without re-optimizing.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "theta_file")]
    theta: Option<Vec<f64>>,
    /// JSON file holding `theta_star` (for example the output of `optimize`).
    #[arg(long)]
    theta_file: Option<PathBuf>,
    /// Starting point for optimization when no theta* is supplied; zeros when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta0: Option<Vec<f64>>,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long = "opt-tol", default_value_t = 1e-10)]
    opt_tol: f64,
    #[arg(long, default_value_t = 4)]
    seeds: usize,
    #[arg(long, default_value_t = 1e-4)]
    armijo_c1: f64,
    #[arg(long, default_value_t = 0.5)]
    backtrack: f64,
}

#[derive(Args)]
struct DeriveArgs {
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    /// Shots per Pauli term; exact circuit expectations when absent.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum, default_value_t = GuardArg::Error)]
    guard: GuardArg,
    #[arg(long, default_value_t = vqederiv::assembler::DEFAULT_GUARD_TOL)]
    guard_tol: f64,
    /// Also evaluate the unsimplified third-order expression and record the difference.
    #[arg(long)]
    unsimplified: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BackendArg {
    Exact,
    Ancilla,
    Lowdepth,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GuardArg {
    Error,
    Warn,
}

enum CliError {
    Io(String),
    Input(String),
    Core(Error),
    Validation(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind_and_code(&self) -> (&'static str, u8) {
        match self {
            CliError::Io(_) => ("io", EXIT_IO),
            CliError::Input(_) => ("invalid_input", EXIT_INPUT),
            CliError::Validation(_) => ("validation", EXIT_VALIDATION),
            CliError::Core(e) => match e {
                Error::NotStationary { .. } => ("not_stationary", EXIT_NOT_STATIONARY),
                Error::Solve(_)
                | Error::NonFinite(_)
                | Error::Orthogonality { .. }
                | Error::NonAscending { .. }
                | Error::BranchJump { .. }
                | Error::SignCalibration(_)
                | Error::NotNormalized(_) => ("numerical", EXIT_NUMERICAL),
                _ => ("invalid_input", EXIT_INPUT),
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io(m) | CliError::Input(m) | CliError::Validation(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

struct Problem {
    family: HamiltonianFamily,
    circuit: Circuit,
    x: Vec<f64>,
}

fn load_problem(input: &InputArgs, manifest: &mut RunManifest) -> CliResult<Problem> {
    let (h_path, h_text) = match &input.hamiltonian {
        Some(p) => (p.display().to_string(), read_file(p)?),
        None => ("bundled:model".to_string(), MODEL_HAMILTONIAN_JSON.to_string()),
    };
    let (a_path, a_text) = match &input.ansatz {
        Some(p) => (p.display().to_string(), read_file(p)?),
        None => ("bundled:y_rotation".to_string(), Y_ROTATION_ANSATZ_JSON.to_string()),
    };
    manifest.inputs.push(InputRecord::new("hamiltonian", &h_path, &h_text));
    manifest.inputs.push(InputRecord::new("ansatz", &a_path, &a_text));
    let family = HamiltonianFamily::from_json(&h_text)?;
    let mut circuit = Circuit::from_json(&a_text)?;
    if circuit.n_qubits() < family.n_qubits() {
        circuit = circuit.padded(family.n_qubits());
    } else if circuit.n_qubits() > family.n_qubits() {
        return Err(Error::QubitMismatch { left: circuit.n_qubits(), right: family.n_qubits() }.into());
    }
    let x = input.x.clone().unwrap_or_else(|| vec![0.0; family.x_dim()]);
    check_x(&family, &x)?;
    manifest.set("x", &x);
    Ok(Problem { family, circuit, x })
}

fn check_x(family: &HamiltonianFamily, x: &[f64]) -> CliResult<()> {
    if x.len() != family.x_dim() {
        return Err(Error::DimensionMismatch { expected: family.x_dim(), got: x.len() }.into());
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Input("x values must be finite".into()));
    }
    Ok(())
}

fn optimizer_config(opt: &OptArgs, seed: u64, manifest: &mut RunManifest) -> OptimizerConfig {
    let cfg = OptimizerConfig {
        max_iters: opt.max_iters,
        tol: opt.opt_tol,
        seeds: opt.seeds,
        seed: derive_named(seed, "optimizer"),
        c1: opt.armijo_c1,
        backtrack: opt.backtrack,
        ..OptimizerConfig::default()
    };
    manifest.set("optimizer", json!({
        "max_iters": cfg.max_iters,
        "tol": cfg.tol,
        "seeds": cfg.seeds,
        "seed": cfg.seed,
        "c1": cfg.c1,
        "backtrack": cfg.backtrack,
        "max_backtracks": cfg.max_backtracks,
    }));
    cfg
}

fn theta_from_json(v: &Value) -> Option<Vec<f64>> {
    let arr = match v {
        Value::Array(_) => v,
        Value::Object(m) => m.get("theta_star").or_else(|| m.get("result").and_then(|r| r.get("theta_star")))?,
        _ => return None,
    };
    arr.as_array()?.iter().map(Value::as_f64).collect()
}

/// theta* from flags or file, or an optimization at `x` when neither is given.
fn resolve_theta(p: &Problem, theta: &ThetaArgs, cfg: &OptimizerConfig, manifest: &mut RunManifest) -> CliResult<Vec<f64>> {
    let n = p.circuit.n_params();
    let given = if let Some(t) = &theta.theta {
        Some(t.clone())
    } else if let Some(path) = &theta.theta_file {
        let text = read_file(path)?;
        manifest.inputs.push(InputRecord::new("theta", &path.display().to_string(), &text));
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Some(theta_from_json(&v).ok_or_else(|| CliError::Input(format!("{}: no numeric theta_star found", path.display())))?)
    } else {
        None
    };
    let t = match given {
        Some(t) => {
            manifest.set("theta_source", "given");
            t
        }
        None => {
            let theta0 = theta.theta0.clone().unwrap_or_else(|| vec![0.0; n]);
            if theta0.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: theta0.len() }.into());
            }
            manifest.set("theta_source", "optimized");
            let r = optimize(&p.circuit, &theta0, &p.family.eval(&p.x)?, cfg)?;
            manifest.mark("optimize");
            r.theta_star
        }
    };
    if t.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: t.len() }.into());
    }
    Ok(t)
}

fn backend(d: &DeriveArgs, seed: u64, manifest: &mut RunManifest) -> Backend {
    let kind = match d.backend {
        BackendArg::Exact => BackendKind::Exact,
        BackendArg::Ancilla => BackendKind::Ancilla,
        BackendArg::Lowdepth => BackendKind::LowDepth,
    };
    let b = Backend { kind, shots: d.shots, seed: derive_named(seed, "shots") };
    manifest.backend = Some(b);
    b
}

fn assembly(d: &DeriveArgs, manifest: &mut RunManifest) -> AssemblyConfig {
    manifest.set("order", d.order);
    manifest.set("guard", d.guard);
    manifest.set("guard_tol", d.guard_tol);
    manifest.set("unsimplified_check", d.unsimplified);
    AssemblyConfig {
        guard: match d.guard {
            GuardArg::Error => GuardMode::Error,
            GuardArg::Warn => GuardMode::Warn,
        },
        guard_tol: d.guard_tol,
        unsimplified_check: d.unsimplified,
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_output(manifest: &RunManifest, key: &str, body: impl Serialize) -> CliResult<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("manifest".into(), serde_json::to_value(manifest).map_err(|e| CliError::Io(e.to_string()))?);
    doc.insert(key.into(), serde_json::to_value(body).map_err(|e| CliError::Io(e.to_string()))?);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cmd_optimize(cli: &Cli, input: &InputArgs, opt: &OptArgs) -> CliResult<String> {
    let mut m = RunManifest::new("optimize", cli.seed, cli.timings);
    let p = load_problem(input, &mut m)?;
    let cfg = optimizer_config(opt, cli.seed, &mut m);
    let theta0 = vec![0.0; p.circuit.n_params()];
    let r = optimize(&p.circuit, &theta0, &p.family.eval(&p.x)?, &cfg)?;
    m.mark("optimize");
    json_output(&m, "result", json!({ "x": p.x, "theta_star": r.theta_star, "energy": r.energy, "optimization": r }))
}

fn cmd_derive(cli: &Cli, input: &InputArgs, theta: &ThetaArgs, d: &DeriveArgs, opt: &OptArgs) -> CliResult<String> {
    let mut m = RunManifest::new("derive", cli.seed, cli.timings);
    let p = load_problem(input, &mut m)?;
    let cfg = optimizer_config(opt, cli.seed, &mut m);
    let t = resolve_theta(&p, theta, &cfg, &mut m)?;
    let b = backend(d, cli.seed, &mut m);
    let ac = assembly(d, &mut m);
    let bundle = derivatives(&p.family, &p.circuit, &t, &p.x, d.order, b, &ac)?;
    m.mark("derivatives");
    json_output(&m, "bundle", bundle)
}

/// Grid `from, from + step, ...` up to `to`; empty when `to < from`.
fn grid(from: f64, to: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) || !from.is_finite() || !to.is_finite() {
        return Err(CliError::Input(format!("need finite bounds and a positive step, got from={from} to={to} step={step}")));
    }
    if to < from {
        return Ok(Vec::new());
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + step * k as f64).collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pes(
    cli: &Cli,
    input: &InputArgs,
    theta: &ThetaArgs,
    d: &DeriveArgs,
    opt: &OptArgs,
    from: f64,
    to: f64,
    step: f64,
    x0: Option<f64>,
) -> CliResult<String> {
    let mut m = RunManifest::new("pes", cli.seed, cli.timings);
    let xs = grid(from, to, step)?;
    let x0 = x0.unwrap_or(from);
    let anchored = InputArgs { hamiltonian: input.hamiltonian.clone(), ansatz: input.ansatz.clone(), x: Some(vec![x0]) };
    let p = load_problem(&anchored, &mut m)?;
    m.set("from", from);
    m.set("to", to);
    m.set("step", step);
    let cfg = optimizer_config(opt, cli.seed, &mut m);
    let t = resolve_theta(&p, theta, &cfg, &mut m)?;
    let b = backend(d, cli.seed, &mut m);
    let ac = assembly(d, &mut m);
    let bundle = derivatives(&p.family, &p.circuit, &t, &p.x, d.order, b, &ac)?;
    let pes = TaylorPes::from_bundle(&bundle)?;
    m.mark("derivatives");
    let vqe = xs
        .par_iter()
        .map(|&x| Ok(optimize(&p.circuit, &t, &p.family.eval(&[x])?, &cfg)?.energy))
        .collect::<CliResult<Vec<f64>>>()?;
    m.mark("scan");
    let mut out = m.csv_header();
    out.push_str("x,vqe,harmonic,cubic\n");
    for (x, e) in xs.iter().zip(vqe) {
        let cubic = pes.cubic(*x).map(fmt).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", fmt(*x), fmt(e), fmt(pes.harmonic(*x)), cubic);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_euler(
    cli: &Cli,
    input: &InputArgs,
    theta: &ThetaArgs,
    opt: &OptArgs,
    from: &[f64],
    to: &[f64],
    step: f64,
    reopt_every: Option<usize>,
) -> CliResult<(String, Option<CliError>)> {
    let mut m = RunManifest::new("euler", cli.seed, cli.timings);
    let anchored = InputArgs { hamiltonian: input.hamiltonian.clone(), ansatz: input.ansatz.clone(), x: Some(from.to_vec()) };
    let p = load_problem(&anchored, &mut m)?;
    check_x(&p.family, to)?;
    m.set("to", to);
    m.set("step", step);
    m.set("reopt_every", reopt_every);
    let cfg = optimizer_config(opt, cli.seed, &mut m);
    let t = resolve_theta(&p, theta, &cfg, &mut m)?;
    let scan = ScanConfig { reoptimize_every: reopt_every, compare: true, optimizer: OptimizerConfig::warm(1e-10) };
    let traj = continuation_scan(&p.family, &p.circuit, &t, from, to, step, &scan)?;
    m.mark("scan");
    let mut out = m.csv_header();
    let xcols = if from.len() == 1 { "x".to_string() } else { (0..from.len()).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",") };
    let _ = writeln!(out, "{xcols},E_euler,E_reopt,grad_norm");
    for s in &traj.steps {
        let xs = s.x.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(",");
        let reopt = s.energy_reopt.map(fmt).unwrap_or_default();
        let _ = writeln!(out, "{xs},{},{reopt},{}", fmt(s.energy_euler), fmt(s.grad_norm));
    }
    let err = traj.error.map(|e| CliError::Core(Error::Solve(format!("continuation stopped after {} points: {e}", traj.steps.len()))));
    Ok((out, err))
}

#[allow(clippy::too_many_arguments)]
fn cmd_excited(
    cli: &Cli,
    input: &InputArgs,
    d: &DeriveArgs,
    opt: &OptArgs,
    level: usize,
    beta: Option<&[f64]>,
    drop: bool,
) -> CliResult<String> {
    let mut m = RunManifest::new("excited", cli.seed, cli.timings);
    let p = load_problem(input, &mut m)?;
    m.set("level", level);
    m.set("beta", beta);
    m.set("drop_inner_products", drop);
    let cfg = optimizer_config(opt, cli.seed, &mut m);
    let ac = assembly(d, &mut m);
    if d.shots.is_some() || !matches!(d.backend, BackendArg::Exact) {
        return Err(CliError::Input("excited-state derivatives use the exact backend".into()));
    }
    let circuits = vec![p.circuit.clone(); level + 1];
    let theta0 = vec![vec![0.0; p.circuit.n_params()]; level + 1];
    let stack = vqd(&p.family, &p.x, &circuits, &theta0, beta, &cfg)?;
    m.mark("vqd");
    let bundle = excited_derivatives(&stack, level, d.order, drop, &ac)?;
    m.mark("derivatives");
    let levels: Vec<Value> = stack.levels.iter().map(|l| json!({ "theta": l.theta, "beta": l.beta, "energy": l.energy })).collect();
    json_output(&m, "excited", json!({ "level": level, "levels": levels, "bundle": bundle }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate(
    cli: &Cli,
    input: &InputArgs,
    theta: &ThetaArgs,
    opt: &OptArgs,
    order: usize,
    h: f64,
    tol: Option<f64>,
) -> CliResult<(String, Option<CliError>)> {
    let mut m = RunManifest::new("validate", cli.seed, cli.timings);
    let p = load_problem(input, &mut m)?;
    m.set("order", order);
    m.set("fd_step", h);
    m.set("tol", tol);
    let cfg = optimizer_config(opt, cli.seed, &mut m);
    let t0 = match (&theta.theta, &theta.theta_file) {
        (None, None) => theta.theta0.clone().unwrap_or_else(|| vec![0.0; p.circuit.n_params()]),
        _ => resolve_theta(&p, theta, &cfg, &mut m)?,
    };
    let report = fd_validate(&p.family, &p.circuit, &t0, &p.x, order, h, &cfg)?;
    m.mark("validate");
    let err = match tol {
        Some(tol) if !(report.max_abs_diff <= tol) => {
            Some(CliError::Validation(format!("max abs difference {:e} exceeds {tol:e}", report.max_abs_diff)))
        }
        _ => None,
    };
    Ok((json_output(&m, "report", report)?, err))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let (text, deferred) = match &cli.command {
        Command::Optimize { input, opt } => (cmd_optimize(cli, input, opt)?, None),
        Command::Derive { input, theta, deriv, opt } => (cmd_derive(cli, input, theta, deriv, opt)?, None),
        Command::Pes { input, theta, deriv, opt, from, to, step, x0 } => {
            (cmd_pes(cli, input, theta, deriv, opt, *from, *to, *step, *x0)?, None)
        }
        Command::Euler { input, theta, opt, from, to, step, reopt_every } => {
            cmd_euler(cli, input, theta, opt, from, to, *step, *reopt_every)?
        }
        Command::Excited { input, deriv, opt, level, beta, drop_inner_products } => {
            (cmd_excited(cli, input, deriv, opt, *level, beta.as_deref(), *drop_inner_products)?, None)
        }
        Command::Validate { input, theta, opt, order, fd_step, tol } => cmd_validate(cli, input, theta, opt, *order, *fd_step, *tol)?,
    };
    // Partial results are still written before reporting the failure.
    emit(cli.out.as_deref(), &text)?;
    deferred.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = e.kind_and_code();
            let body = json!({ "error": { "kind": kind, "exit_code": code, "message": e.message() } });
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
