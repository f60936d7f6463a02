//! `spinmem` command-line harness: sweeps to CSV, the operating-point report
//! and the randomized invariant suite.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration or solver error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinmem::config::{parse_f64_list, KeyValues};
use spinmem::experiments::{
    gnuplot_script, rows_to_csv, run_invariant_suite, run_operating_point_report, run_sweep, ExperimentConfig,
    InvariantConfig, SweepKind, SweepSpec,
};

#[derive(Parser)]
#[command(name = "spinmem", version, about = "Squeezing transfer from light to helium-3 spins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the invariant suite.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Number of grid points.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Comma-separated relative field errors ΔB/B.
    #[arg(long, global = true, value_parser = parse_db_list)]
    db_over_b: Option<DbList>,
    /// Also write a gnuplot script for the sweep CSV to this path.
    #[arg(long, global = true)]
    gnuplot: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct DbList(Vec<f64>);

fn parse_db_list(text: &str) -> Result<DbList, String> {
    let list = parse_f64_list(text)?;
    if list.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(DbList(list))
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Variances against Γ/γm.
    SweepGamma,
    /// Best ground-state variance against Γ/γm for several ΔB/B.
    SweepFieldError,
    /// Variances against the input X variance at the configured Γ/γm.
    SweepSqueezing,
    /// Field, frequencies, memory time and homogeneity at the configured Γ/γm.
    OperatingPoint,
    /// Commutator, Heisenberg, oracle and Parseval checks on random draws.
    Invariants,
}

impl Command {
    fn sweep_kind(self) -> SweepKind {
        match self {
            Command::SweepFieldError => SweepKind::FieldError,
            Command::SweepSqueezing => SweepKind::SqueezingInput,
            _ => SweepKind::GammaRatio,
        }
    }
}

struct Setup {
    experiment: ExperimentConfig,
    spec: SweepSpec,
    invariants: InvariantConfig,
}

/// Reads every recognised key so one file can serve all subcommands; unknown
/// keys are an error.
fn load(command: Command, common: &Common) -> Result<Setup, String> {
    let mut kv = match &common.config {
        Some(path) => KeyValues::from_file(path).map_err(|e| e.to_string())?,
        None => KeyValues::default(),
    };
    let experiment = ExperimentConfig::from_key_values(&mut kv).map_err(|e| e.to_string())?;
    let mut spec = SweepSpec::from_key_values(command.sweep_kind(), &mut kv).map_err(|e| e.to_string())?;
    let mut invariants = InvariantConfig::default();
    if let Some(v) = kv.take_usize("draws").map_err(|e| e.to_string())? {
        invariants.draws = v;
    }
    if let Some(v) = kv.take_usize("parseval_draws").map_err(|e| e.to_string())? {
        invariants.parseval_draws = v;
    }
    for (key, slot) in [
        ("commutator_tol", &mut invariants.commutator_tol),
        ("heisenberg_tol", &mut invariants.heisenberg_tol),
        ("oracle_tol", &mut invariants.oracle_tol),
        ("parseval_tol", &mut invariants.parseval_tol),
    ] {
        if let Some(v) = kv.take_f64(key).map_err(|e| e.to_string())? {
            *slot = v;
        }
    }
    kv.finish().map_err(|e| e.to_string())?;

    if let Some(points) = common.points {
        spec.grid.points = points;
    }
    if let Some(list) = &common.db_over_b {
        spec.db_over_b = list.0.clone();
    }
    if let Some(out) = &common.out {
        spec.output = Some(out.clone());
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(Setup { experiment, spec, invariants })
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn run(cli: &Cli) -> Result<bool, String> {
    let setup = load(cli.command, &cli.common)?;
    match cli.command {
        Command::SweepGamma | Command::SweepFieldError | Command::SweepSqueezing => {
            let rows = run_sweep(&setup.experiment, &setup.spec).map_err(|e| e.to_string())?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} points failed; see the status column", rows.len());
            }
            emit(setup.spec.output.as_ref(), &rows_to_csv(&rows))?;
            if let Some(script) = &cli.common.gnuplot {
                let csv = setup.spec.output.as_ref().map_or("sweep.csv".into(), |p| p.display().to_string());
                fs::write(script, gnuplot_script(&setup.spec, &csv))
                    .map_err(|e| format!("cannot write {}: {e}", script.display()))?;
            }
            Ok(true)
        }
        Command::OperatingPoint => {
            let db = cli.common.db_over_b.as_ref().and_then(|v| v.0.first().copied()).unwrap_or(1e-4);
            let report = run_operating_point_report(&setup.experiment, db).map_err(|e| e.to_string())?;
            print!("{report}");
            if let Some(out) = &cli.common.out {
                emit(Some(out), &report.csv())?;
            }
            Ok(true)
        }
        Command::Invariants => {
            let report = run_invariant_suite(&setup.invariants, cli.common.seed).map_err(|e| e.to_string())?;
            let text = format!("{report}\n");
            print!("{text}");
            if let Some(out) = &cli.common.out {
                emit(Some(out), &text)?;
            }
            Ok(report.passes())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
