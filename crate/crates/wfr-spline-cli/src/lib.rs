//! Batch command-line front end for unbalanced-transport splines.
//!
//! The binary (`wfrspline`) exposes five subcommands — `distance`,
//! `geodesic`, `spline`, `experiment`, and `verify` — that read discrete
//! measures from CSV, drive the core solver/spline pipeline, and emit CSV
//! and JSON for external plotting. Nothing here renders figures.
//!
//! Every command is deterministic: identical inputs, flags, and seeds
//! produce byte-identical output files.
//!
//! # Exit codes
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | input error: unreadable or malformed files, invalid configuration |
//! | 2    | solver stopped at its iteration cap before reaching tolerance |
//! | 3    | internal geometry failure (should not occur; indicates a bug) |
//! | 4    | one or more verification checks failed |

pub mod commands;
pub mod config;
pub mod io;
pub mod presets;
pub mod report;

use wfr_spline_core::pipeline::PipelineError;
use wfr_spline_core::solver::SolverError;

/// Command failures, each mapping to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input, or an invalid configuration.
    #[error("{0}")]
    Input(String),
    /// The scaling solver hit its iteration cap before reaching tolerance.
    /// Commands that write files still write them before reporting this.
    #[error("solver stopped after {iterations} iterations at residual {residual:e}")]
    Nonconvergence {
        /// Iterations performed.
        iterations: usize,
        /// Marginal residual at the stop.
        residual: f64,
    },
    /// A geometry evaluation failed past input validation — the feasibility
    /// rescale makes this unreachable unless scales were forced by hand.
    #[error("internal geometry failure: {0}")]
    Geometry(String),
    /// One or more verification checks failed.
    #[error("{failed} of {total} verification checks failed")]
    Verification {
        /// Number of failing checks.
        failed: usize,
        /// Number of checks run.
        total: usize,
    },
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Nonconvergence { .. } => 2,
            CliError::Geometry(_) => 3,
            CliError::Verification { .. } => 4,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            // Shape and emptiness problems trace back to what the user fed in.
            SolverError::DimensionMismatch { .. }
            | SolverError::EmptyMeasure { .. }
            | SolverError::ShapeMismatch { .. } => CliError::Input(e.to_string()),
            // Map evaluations outside their domain are internal conditions:
            // the pipeline guards them before they can escape.
            SolverError::DanglingSource { .. } | SolverError::QueryOutOfRange => {
                CliError::Geometry(e.to_string())
            }
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::TooFewMeasures { .. }
            | PipelineError::KnotCountMismatch { .. }
            | PipelineError::NonMonotoneTimes { .. }
            | PipelineError::DecoupledSegment { .. }
            | PipelineError::AllParticlesVanished => CliError::Input(e.to_string()),
            PipelineError::Solver(se) => se.into(),
            PipelineError::Spline(_) | PipelineError::Bezier(_) | PipelineError::Geometry(_) => {
                CliError::Geometry(e.to_string())
            }
        }
    }
}

impl From<wfr_spline_core::cone::GeometryError> for CliError {
    fn from(e: wfr_spline_core::cone::GeometryError) -> Self {
        CliError::Geometry(e.to_string())
    }
}

impl From<wfr_spline_core::measure::MeasureError> for CliError {
    fn from(e: wfr_spline_core::measure::MeasureError) -> Self {
        CliError::Input(e.to_string())
    }
}
