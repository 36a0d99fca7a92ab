//! `halfline`: config-driven runs of the half-line scattering computations.
//!
//! Exit status: 0 on success, 1 when a computation fails or `verify` finds a
//! failing criterion, 2 for configuration and input errors.

mod config;
mod plot;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, ExperimentConfig, Operation};

#[derive(Parser)]
#[command(name = "halfline", version, about = "Half-line scattering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regular, Jost and zero-energy solutions on the grid.
    Solve(RunArgs),
    /// The triangular kernel A(r, t).
    Kernel(RunArgs),
    /// f built from the source g and its generalized transform.
    Transform(RunArgs),
    /// Gram positivity of the transform of a measure.
    Bochner(RunArgs),
    /// Phase shifts and both Gamma profiles.
    Phaseshift(RunArgs),
    /// The acceptance suite; exits 1 if any criterion fails.
    Verify(RunArgs),
    /// The operation named in the config file.
    Run(RunArgs),
    /// SVG line plot of a numeric CSV.
    Plot {
        csv: PathBuf,
        output: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// ODE tolerance (overrides `tolerances.ode`).
    #[arg(long)]
    tol: Option<f64>,
}

enum Failure {
    Config(String),
    Compute(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(tol) = args.tol {
        cfg.tolerances.ode = tol;
    }
    Ok(cfg)
}

fn execute(op: Option<Operation>, args: &RunArgs) -> Result<bool, Failure> {
    let cfg = load(args)?;
    let op = op
        .or(cfg.operation)
        .ok_or_else(|| Failure::Config("`run` needs `operation` in the config".into()))?;
    cfg.validate(op)?;
    let mut out = run::Artifacts::new(&cfg.output.dir).map_err(|e| Failure::Compute(format!("{e:#}")))?;
    let ok = run::run(&cfg, op, &mut out).map_err(|e| match e.downcast::<ConfigError>() {
        Ok(c) => Failure::Config(c.to_string()),
        Err(e) => Failure::Compute(format!("{e:#}")),
    })?;
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
    Ok(ok)
}

fn plot(csv: &PathBuf, output: &PathBuf) -> Result<bool, Failure> {
    let text = std::fs::read_to_string(csv).map_err(|e| Failure::Config(format!("{}: {e}", csv.display())))?;
    let table = halfline::io::read_csv(&text).map_err(|e| Failure::Config(format!("{}: {e}", csv.display())))?;
    let svg = plot::render(&table).map_err(Failure::Config)?;
    std::fs::write(output, svg).map_err(|e| Failure::Compute(format!("{}: {e}", output.display())))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Solve(a) => execute(Some(Operation::Solve), a),
        Command::Kernel(a) => execute(Some(Operation::Kernel), a),
        Command::Transform(a) => execute(Some(Operation::Transform), a),
        Command::Bochner(a) => execute(Some(Operation::Bochner), a),
        Command::Phaseshift(a) => execute(Some(Operation::Phaseshift), a),
        Command::Verify(a) => execute(Some(Operation::Verify), a),
        Command::Run(a) => execute(None, a),
        Command::Plot { csv, output } => plot(csv, output),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
