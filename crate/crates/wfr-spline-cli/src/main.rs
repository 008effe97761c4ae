//! `wfrspline`: transport distances, geodesics, and interpolating splines
//! for discrete measures of differing total masses.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use wfr_spline_cli::commands;
use wfr_spline_cli::config::Overrides;

#[derive(Debug, Parser)]
#[command(
    name = "wfrspline",
    version,
    about = "Interpolate sequences of positive measures with unbalanced-transport splines",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transport distance between two measure CSVs (JSON on stdout).
    Distance {
        /// Source measure CSV (header x1,...,xd,mass).
        source: PathBuf,
        /// Target measure CSV.
        target: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Geodesic interpolation between two measure CSVs.
    Geodesic {
        /// Source measure CSV.
        source: PathBuf,
        /// Target measure CSV.
        target: PathBuf,
        /// JSON run configuration; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Interpolating spline through a sequence of measure CSVs.
    Spline {
        /// Measure CSVs in knot order (or set them in --config).
        measures: Vec<PathBuf>,
        /// JSON run configuration; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Knot times, comma-separated, one per measure.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        times: Option<Vec<f64>>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in experiment: one-dim, two-dim-grid, or
    /// two-dim-subsample.
    Experiment {
        /// Experiment name.
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the numerical verification suite (JSON on stdout).
    Verify {
        /// Keep only checks whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace the threshold of every error-bound (at-most) check.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn main() -> ExitCode {
    // Usage problems must exit 1: clap's default exit code for them (2) is
    // reserved here for solver nonconvergence.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::Distance { source, target, overrides } => {
            commands::cmd_distance(source, target, overrides)
        }
        Command::Geodesic { source, target, config, overrides } => {
            commands::cmd_geodesic(source, target, config.as_deref(), overrides)
        }
        Command::Spline { measures, config, times, overrides } => {
            commands::cmd_spline(measures, config.as_deref(), times.as_deref(), overrides)
        }
        Command::Experiment { name, overrides } => commands::cmd_experiment(name, overrides),
        Command::Verify { filter, seed, tolerance } => {
            commands::cmd_verify(filter.as_deref(), *seed, *tolerance)
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(u8::try_from(err.exit_code()).expect("exit codes fit in u8"))
        }
    }
}
