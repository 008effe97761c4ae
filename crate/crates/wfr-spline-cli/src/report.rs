//! JSON report schemas written by the subcommands.
//!
//! Reports are plain serializable structs; field names are the output
//! contract, so changes here change the CLI's public format.

use serde::Serialize;
use wfr_spline_core::pipeline::{
    CurvatureReport, ParticleTrajectory, PipelineDiagnostics, SegmentDiagnostics,
};
use wfr_spline_core::verify::{CheckOutcome, Comparison};

/// Result of a single pairwise distance computation.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    /// Transport distance between the measures.
    pub distance: f64,
    /// Its square: the unregularized transport objective.
    pub squared: f64,
    /// Regularization strength used.
    pub epsilon: f64,
    /// Scaling iterations performed.
    pub iterations: usize,
    /// Whether the solver met its tolerance.
    pub converged: bool,
    /// Final sup-norm log-scaling change.
    pub residual: f64,
    /// Total mass the plan couples.
    pub coupled_mass: f64,
}

/// Solver diagnostics of one knot segment.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentReport {
    /// Segment index (0 couples knots 0 and 1).
    pub index: usize,
    /// Transport distance between the segment's knot measures.
    pub wfr_distance: f64,
    /// Scaling iterations performed.
    pub iterations: usize,
    /// Whether the solve met its tolerance.
    pub converged: bool,
    /// Final sup-norm log-scaling change.
    pub residual: f64,
    /// Unregularized primal objective of the plan.
    pub objective: f64,
    /// Total mass the plan couples.
    pub coupled_mass: f64,
}

impl SegmentReport {
    /// Packages one segment's diagnostics under its index.
    pub fn new(index: usize, diag: &SegmentDiagnostics) -> Self {
        Self {
            index,
            wfr_distance: diag.wfr_distance,
            iterations: diag.iterations,
            converged: diag.converged,
            residual: diag.residual,
            objective: diag.objective,
            coupled_mass: diag.coupled_mass,
        }
    }
}

/// Squared-acceleration cost of the assembled curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSummary {
    /// Weighted aggregate `Σ w·cost` over all particles.
    pub aggregate: f64,
    /// Quadrature steps per unit of normalized time.
    pub n_steps: usize,
    /// Finite-difference step of the acceleration estimate.
    pub fd_step: f64,
    /// Per-particle squared-acceleration integrals.
    pub per_particle: Vec<f64>,
}

impl CurvatureSummary {
    /// Packages a curvature report with the quadrature parameters that
    /// produced it.
    pub fn new(report: &CurvatureReport, n_steps: usize, fd_step: f64) -> Self {
        Self {
            aggregate: report.aggregate,
            n_steps,
            fd_step,
            per_particle: report.per_particle.clone(),
        }
    }
}

/// Summary of a full spline run.
#[derive(Debug, Clone, Serialize)]
pub struct SplineSummary {
    /// Regularization strength used for every segment.
    pub epsilon: f64,
    /// Knot times.
    pub knot_times: Vec<f64>,
    /// Global position shrink applied before assembly.
    pub space_scale: f64,
    /// Global velocity damping applied before assembly.
    pub time_scale: f64,
    /// Number of transported particles.
    pub particle_count: usize,
    /// First-knot support points that produced no trajectory.
    pub dropped_particles: usize,
    /// Their mass, valued at the first knot.
    pub dropped_mass: f64,
    /// Total mass of each input measure.
    pub input_masses: Vec<f64>,
    /// Total particle mass `Σ w·r²` carried at each knot.
    pub knot_masses: Vec<f64>,
    /// Number of curve samples written.
    pub sample_count: usize,
    /// Samples per knot segment.
    pub samples_per_segment: usize,
    /// Per-segment solver diagnostics.
    pub segments: Vec<SegmentReport>,
    /// Squared-acceleration cost of the assembled curve.
    pub curvature: CurvatureSummary,
}

/// Summary of a two-measure geodesic run.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSummary {
    /// Regularization strength used.
    pub epsilon: f64,
    /// Transport distance between the endpoints.
    pub wfr_distance: f64,
    /// Position shrink applied so every particle path stays clear of the
    /// antipodal cut (1 when no shrink was needed).
    pub space_scale: f64,
    /// Number of transported particles.
    pub particle_count: usize,
    /// Source support points that produced no trajectory.
    pub dropped_particles: usize,
    /// Their mass, valued at the source.
    pub dropped_mass: f64,
    /// Total mass of the two input measures.
    pub input_masses: Vec<f64>,
    /// Total particle mass `Σ w·r²` at the two endpoints.
    pub knot_masses: Vec<f64>,
    /// Number of curve samples written.
    pub sample_count: usize,
    /// Solver diagnostics of the single coupling.
    pub segments: Vec<SegmentReport>,
}

/// Result table of the verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// Seed the randomized checks ran under.
    pub seed: u64,
    /// Checks that passed.
    pub passed: usize,
    /// Checks that failed.
    pub failed: usize,
    /// Every executed check in suite order.
    pub checks: Vec<CheckReport>,
}

/// One verification check's outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    /// Stable check name.
    pub name: String,
    /// Measured value.
    pub observed: f64,
    /// Bound the value is held against.
    pub threshold: f64,
    /// Direction of the bound: `"at-most"` or `"at-least"`.
    pub comparison: String,
    /// Whether the bound held.
    pub pass: bool,
}

impl From<&CheckOutcome> for CheckReport {
    fn from(outcome: &CheckOutcome) -> Self {
        Self {
            name: outcome.name.to_string(),
            observed: outcome.observed,
            threshold: outcome.threshold,
            comparison: match outcome.comparison {
                Comparison::AtMost => "at-most".to_string(),
                Comparison::AtLeast => "at-least".to_string(),
            },
            pass: outcome.pass,
        }
    }
}

/// Per-segment reports for a whole diagnostics block.
pub fn segment_reports(diagnostics: &PipelineDiagnostics) -> Vec<SegmentReport> {
    diagnostics
        .segments
        .iter()
        .enumerate()
        .map(|(index, diag)| SegmentReport::new(index, diag))
        .collect()
}

/// Total particle mass `Σ w·r²` carried at each of `n_knots` knots.
///
/// # Panics
///
/// Panics if any trajectory has fewer knots than `n_knots`; trajectories
/// from one pipeline run always share the knot count.
pub fn knot_masses(trajectories: &[ParticleTrajectory], n_knots: usize) -> Vec<f64> {
    (0..n_knots)
        .map(|k| {
            trajectories
                .iter()
                .map(|traj| {
                    let r = traj.knots()[k].r();
                    traj.weight() * r * r
                })
                .sum()
        })
        .collect()
}
