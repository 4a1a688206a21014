//! The `stormhazard` binary: a file-based pipeline from an ap index series to extreme
//! storm intensity curves.
//!
//! One subcommand per pipeline stage (decluster, fit, intensity, validate,
//! predict, simulate) plus a `pipeline` composite. Every run serializes its
//! resolved configuration next to its outputs as `run_config.json`; `replay`
//! re-executes such a configuration and reproduces the outputs byte for
//! byte. Data goes to files inside `--out-dir` (standard output only when a
//! single-document command is given `--out -`); diagnostics go to standard
//! error. Exit codes: 0 success, 1 data/validation error, 2 usage error.

mod run;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tasks::{
    DeclusterArgs, FitArgs, IntensityArgs, PipelineArgs, PredictArgs, SimulateArgs, Task,
    ValidateArgs,
};

#[derive(Parser)]
#[command(name = "stormhazard", version, about = "Extreme geomagnetic storm intensity estimation")]
struct Cli {
    /// Directory all outputs are written into.
    #[arg(long, default_value = ".", global = true)]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a series to a storm catalog by runs declustering.
    Decluster(DeclusterArgs),
    /// Fit the activity effect and the extreme fraction; emit a fit report.
    Fit(FitArgs),
    /// Estimate base intensity curves and their extreme extrapolations.
    Intensity(IntensityArgs),
    /// Chi-square check that storm level is independent of cycle position.
    Validate(ValidateArgs),
    /// Map the extrapolated intensity onto a future cycle.
    Predict(PredictArgs),
    /// Generate synthetic catalogs or series from known parameters.
    Simulate(SimulateArgs),
    /// Decluster, fit, estimate, extrapolate and validate in one run.
    Pipeline(PipelineArgs),
    /// Re-execute a serialized run configuration.
    Replay {
        /// A `run_config.json` produced by a previous run.
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let task = match cli.command {
        Command::Decluster(a) => Task::Decluster(a),
        Command::Fit(a) => Task::Fit(a),
        Command::Intensity(a) => Task::Intensity(a),
        Command::Validate(a) => Task::Validate(a),
        Command::Predict(a) => Task::Predict(a),
        Command::Simulate(a) => Task::Simulate(a),
        Command::Pipeline(a) => Task::Pipeline(a),
        Command::Replay { config } => match run::load_task(&config) {
            Ok(task) => task,
            Err(err) => {
                eprintln!("ERROR: {err}");
                return ExitCode::from(1);
            }
        },
    };
    match run::execute(&task, &cli.out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("ERROR: {err}");
            match err {
                stormhazard::Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
