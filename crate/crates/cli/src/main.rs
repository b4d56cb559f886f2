use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod error;
mod output;
mod run;
mod scenario;

use error::CliError;
use scenario::{Overrides, ScenarioFile, ScenarioKind};

/// Protective measurement of a qubit by a qubit probe.
#[derive(Parser)]
#[command(name = "qprobe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One measurement, closed system.
    Single(RunArgs),
    /// A chain of measurements on the same system (`chain_length`).
    Repeat(RunArgs),
    /// One run per value of a swept parameter.
    Sweep(RunArgs),
    /// One measurement with system and/or probe coupled to an environment.
    Env(RunArgs),
    /// Translate trapped-ion parameters and run the resulting measurement.
    Iontrap(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory that relative output paths are resolved against.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Largest master-equation step, in units of 1/omega_0.
    #[arg(long)]
    dt: Option<f64>,
    /// Samples per interaction period, endpoints included.
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Single(a) => (ScenarioKind::Single, a),
        Command::Repeat(a) => (ScenarioKind::Repeat, a),
        Command::Sweep(a) => (ScenarioKind::Sweep, a),
        Command::Env(a) => (ScenarioKind::Env, a),
        Command::Iontrap(a) => (ScenarioKind::Iontrap, a),
    };
    match run_file(kind, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run_file(kind: ScenarioKind, args: &RunArgs) -> Result<(), CliError> {
    let file = ScenarioFile::load(&args.config)?;
    let overrides = Overrides {
        out_dir: args.out_dir.clone(),
        dt: args.dt,
        samples: args.samples,
    };
    let scenario = file
        .resolve(kind, &run::stem_of(&args.config), &overrides)
        .map_err(|message| CliError::Config {
            path: args.config.clone(),
            message,
        })?;
    run::run(&scenario, &args.config)
}
