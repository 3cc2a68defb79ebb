// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! `casimir-sim`: run single trajectories, parameter sweeps and the
//! closed-form estimates from the command line.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use casimir_core::analytic::{d_crit_res, w_casimir, w_lamb, SwitchSpec};
use casimir_core::config::{ConfigMap, RunSpec};
use casimir_core::io::{sidecar_path, write_sidecar, write_sweep_csv, write_trajectory_csv};
use casimir_core::lindblad::Termination;
use casimir_core::sweep::{linspace, run_sweep, SweepAxis, SweepSpec};
use casimir_core::Error;
use clap::{Args, Parser, Subcommand};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BREACH: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

const THREADS_ENV: &str = "CASIMIR_SIM_THREADS";

#[derive(Parser)]
#[command(
    name = "casimir-sim",
    version,
    about = "Qubit in a frequency-modulated lossy cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(RunArgs),
    /// Integrate a family of runs and tabulate their steady envelopes.
    Sweep(SweepArgs),
    /// Evaluate a closed-form estimate.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output CSV path; overrides `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Parameter to vary: Omega, d, gamma, kappa, gamma_phi or epsilon.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated axis values.
    #[arg(long, conflicts_with_all = ["from", "to", "points"])]
    values: Option<String>,
    #[arg(long, requires_all = ["to", "points"])]
    from: Option<f64>,
    #[arg(long, requires_all = ["from", "points"])]
    to: Option<f64>,
    #[arg(long, requires_all = ["from", "to"])]
    points: Option<usize>,
    /// Worker threads; capped by CASIMIR_SIM_THREADS.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum AnalyticCommand {
    /// Threshold drive amplitude of the bare cavity.
    Dcrit {
        #[arg(long, default_value_t = 1.0)]
        omega0: f64,
        #[arg(long = "Omega")]
        modulation: f64,
        #[arg(long)]
        kappa: f64,
    },
    /// Switch-induced excitation through photon-pair absorption.
    Wcasimir(SwitchArgs),
    /// Switch-induced excitation through counterrotating terms.
    Wlamb(SwitchArgs),
}

#[derive(Args)]
struct SwitchArgs {
    #[arg(long)]
    omega1: f64,
    #[arg(long)]
    omega2: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    g: f64,
}

impl SwitchArgs {
    fn spec(&self) -> SwitchSpec {
        SwitchSpec {
            omega1: self.omega1,
            omega2: self.omega2,
            epsilon: self.epsilon,
            g: self.g,
        }
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::StepSizeUnderflow { .. } | Error::NonFiniteDrive { .. } => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn termination_code(status: &Termination) -> u8 {
    match status {
        Termination::Completed => 0,
        Termination::TruncationBreach { .. } => EXIT_BREACH,
        _ => EXIT_NUMERICAL,
    }
}

fn load_config(args: &RunArgs) -> Result<ConfigMap, Failure> {
    let mut map = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            ConfigMap::parse(&text)?
        }
        None => ConfigMap::new(),
    };
    for assignment in &args.overrides {
        map.apply_override(assignment)?;
    }
    if let Some(out) = &args.out {
        map.set("output.path", out.to_string_lossy().into_owned())?;
    }
    Ok(map)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(path, e))
}

fn warn(spec: &RunSpec) {
    for w in spec.warnings() {
        eprintln!("warning: {w}");
    }
}

fn simulate(args: &RunArgs) -> Result<u8, Failure> {
    let mut map = load_config(args)?;
    if map.get("output.path").is_none() {
        map.set("output.path", "trajectory.csv")?;
    }
    let spec = RunSpec::resolve(&map)?;
    warn(&spec);
    let path = PathBuf::from(spec.output_path.clone().unwrap_or_default());
    let started = Instant::now();
    let traj = spec.execute()?;
    let wall = started.elapsed();

    write_trajectory_csv(create(&path)?, &traj).map_err(|e| Failure::io(&path, e))?;
    let meta = sidecar_path(&path);
    write_sidecar(
        create(&meta)?,
        &spec.to_config_text(),
        &traj.status.to_string(),
        wall,
    )
    .map_err(|e| Failure::io(&meta, e))?;

    if !traj.status.is_completed() {
        eprintln!("run ended early: {}", traj.status);
    }
    Ok(termination_code(&traj.status))
}

fn worker_count(requested: Option<usize>) -> Result<usize, Failure> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Failure::config(format!(
                    "{THREADS_ENV} must be a positive integer, got `{v}`"
                ))
            })?,
        Err(_) => usize::MAX,
    };
    if requested == Some(0) {
        return Err(Failure::config("--workers must be at least 1"));
    }
    Ok(requested.unwrap_or(available).min(cap).max(1))
}

fn sweep(args: &SweepArgs) -> Result<u8, Failure> {
    let mut map = load_config(&args.run)?;
    if map.get("output.path").is_none() {
        map.set("output.path", "sweep.csv")?;
    }
    if let Some(axis) = &args.axis {
        map.set("sweep.axis", axis.clone())?;
    }
    if let Some(values) = &args.values {
        map.set("sweep.values", values.clone())?;
    }
    if let (Some(from), Some(to), Some(points)) = (args.from, args.to, args.points) {
        if points == 0 {
            return Err(Failure::config("--points must be at least 1"));
        }
        let joined: Vec<String> = linspace(from, to, points)
            .iter()
            .map(f64::to_string)
            .collect();
        map.set("sweep.values", joined.join(","))?;
    }
    let base = RunSpec::resolve(&map)?;
    warn(&base);
    let axis: SweepAxis = base
        .sweep_axis
        .ok_or_else(|| Failure::config("no sweep axis: pass --axis or set sweep.axis"))?;
    let values = base.sweep_values.clone().ok_or_else(|| {
        Failure::config("no sweep values: pass --values, --from/--to/--points or set sweep.values")
    })?;
    let spec = SweepSpec {
        base: map.clone(),
        axis,
        values,
        workers: worker_count(args.workers)?,
    };
    let path = PathBuf::from(base.output_path.clone().unwrap_or_default());
    let started = Instant::now();
    let rows = run_sweep(&spec)?;
    let wall = started.elapsed();

    write_sweep_csv(create(&path)?, &rows).map_err(|e| Failure::io(&path, e))?;
    let failed = rows.iter().filter(|r| r.envelope.is_none()).count();
    let status = format!(
        "completed ({} points, {failed} without envelope)",
        rows.len()
    );
    let mut text = map.to_text();
    text.push_str("# resolved base:\n");
    for line in base.to_config_text().lines() {
        text.push_str("#   ");
        text.push_str(line);
        text.push('\n');
    }
    let meta = sidecar_path(&path);
    write_sidecar(create(&meta)?, &text, &status, wall).map_err(|e| Failure::io(&meta, e))?;
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "{} = {}: {}",
            axis,
            row.axis_value,
            row.error.as_deref().unwrap_or("")
        );
    }
    Ok(0)
}

fn analytic(cmd: &AnalyticCommand) -> Result<u8, Failure> {
    let value = match cmd {
        AnalyticCommand::Dcrit {
            omega0,
            modulation,
            kappa,
        } => d_crit_res(*omega0, *modulation, *kappa)?,
        AnalyticCommand::Wcasimir(a) => w_casimir(&a.spec())?,
        AnalyticCommand::Wlamb(a) => w_lamb(&a.spec())?,
    };
    println!("{}", significant(value, 12));
    Ok(0)
}

/// `x` rounded to `digits` significant digits, without trailing zeros.
fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().unwrap_or(x);
    rounded.to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args),
        Command::Analytic(cmd) => analytic(cmd),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
