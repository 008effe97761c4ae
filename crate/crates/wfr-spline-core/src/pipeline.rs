//! End-to-end transport splines: from a sequence of discrete measures to a
//! smoothly interpolating curve of measures.
//!
//! The pipeline runs in four stages, each exposed on its own:
//!
//! 1. [`build_trajectories`] — solve the entropic unbalanced transport
//!    problem between consecutive measures, compose the resulting maps into
//!    per-particle position chains, and assign each knot a mass coordinate
//!    from the marginal density ratio.
//! 2. [`estimate_knot_velocities`] — fit natural cubic splines through each
//!    particle's position and mass series to obtain knot velocities.
//! 3. [`assemble_spline`] — apply one global feasibility rescale shared by
//!    every particle, then solve for the Bézier control points of each
//!    segment.
//! 4. [`sample_curve`] — evaluate all segments on a sample grid and emit
//!    discrete measures, mapping positions back through the global scale.
//!
//! [`run_pipeline`] chains the four stages. [`curve_curvature_report`]
//! evaluates the acceleration objective of an assembled spline.

use alloc::vec::Vec;

use crate::bezier::{
    self, control_points, BezierError, ConeSplineSegment, KnotVelocity, TrajectoryKnot,
};
use crate::cone::{ConePoint, GeometryError};
use crate::curvature::{path_curvature_cost, ConePath};
use crate::math;
use crate::measure::DiscreteMeasure;
use crate::solver::{
    self, density_ratio, kernel_smooth, map_extend, solve_entropic, SolverError, SolverSide,
    TransportPlan,
};
use crate::spline::{natural_cubic_fit, KnotSeries, SplineError};

/// Errors from the transport-spline pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    /// Interpolation needs at least two measures.
    #[error("need at least two measures, got {got}")]
    TooFewMeasures {
        /// Number of measures supplied.
        got: usize,
    },
    /// One knot time per measure.
    #[error("got {measures} measures but {times} knot times")]
    KnotCountMismatch {
        /// Number of measures.
        measures: usize,
        /// Number of knot times.
        times: usize,
    },
    /// Knot times must strictly increase.
    #[error("knot times must be strictly increasing (offending index {index})")]
    NonMonotoneTimes {
        /// Index `i` with `times[i] ≤ times[i−1]`.
        index: usize,
    },
    /// A transport segment coupled no mass at all: the adjacent measures
    /// live entirely ≥ π/2 apart.
    #[error("transport segment {segment} coupled no mass; the measures are fully separated")]
    DecoupledSegment {
        /// Index of the segment (between measures `segment` and
        /// `segment + 1`).
        segment: usize,
    },
    /// Every particle vanished before the last knot.
    #[error("all particles vanished; no trajectory survived to the final knot")]
    AllParticlesVanished,
    /// An unbalanced transport solve or map evaluation failed.
    #[error(transparent)]
    Solver(#[from] SolverError),
    /// A cubic velocity fit failed.
    #[error(transparent)]
    Spline(#[from] SplineError),
    /// A control-point solve failed.
    #[error(transparent)]
    Bezier(#[from] BezierError),
    /// A cone-geometry evaluation failed.
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which coupling supplies the marginal for an interior knot's mass.
///
/// Adjacent couplings need not share their marginal at the common measure;
/// the forward rule keeps each knot's mass tied to the segment that leaves
/// it, the averaging rule splits the difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteriorMarginalRule {
    /// Use the outgoing coupling's source marginal (default).
    Forward,
    /// Average the outgoing source and incoming target density ratios.
    Average,
}

/// How a knot's mass coordinate is assigned from the measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassRule {
    /// `r² = σ`, the density ratio of the measure against the coupling
    /// marginal (default). Keeps `Σ w·r²` equal to the coupled measure mass.
    MarginalRatio,
    /// `r² = `smoothed raw measure weight. A literal mass reading without
    /// the marginal normalization; bookkeeping identities do not hold.
    RootWeight,
}

/// Tuning knobs for the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// Entropic regularization strength; `None` derives
    /// 10⁻³ × (joint support bounding-box diagonal)².
    pub epsilon: Option<f64>,
    /// Iteration budget per transport solve.
    pub max_iters: usize,
    /// Convergence tolerance on the sup-norm log-scaling change.
    pub tol: f64,
    /// Feasibility margin for the global rescale (fraction of π/2).
    pub margin: f64,
    /// Interior-knot marginal choice.
    pub interior_marginal: InteriorMarginalRule,
    /// Knot mass assignment rule.
    pub mass_rule: MassRule,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_iters: 10_000,
            tol: 1e-9,
            margin: 0.05,
            interior_marginal: InteriorMarginalRule::Forward,
            mass_rule: MassRule::MarginalRatio,
        }
    }
}

/// Solver and bookkeeping diagnostics for one transport segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDiagnostics {
    /// Scaling iterations performed.
    pub iterations: usize,
    /// Whether the solve met its tolerance.
    pub converged: bool,
    /// Final sup-norm log-scaling change.
    pub residual: f64,
    /// Unregularized primal objective of the plan.
    pub objective: f64,
    /// Distance estimate √objective against the segment's measures.
    pub wfr_distance: f64,
    /// Total coupled mass before unit rescaling.
    pub coupled_mass: f64,
}

/// Pipeline-level diagnostics: per-segment solver reports plus the particle
/// bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineDiagnostics {
    /// Regularization strength used for every segment.
    pub epsilon: f64,
    /// One entry per consecutive measure pair.
    pub segments: Vec<SegmentDiagnostics>,
    /// Support points of the first measure that produced no trajectory.
    pub dropped_particles: usize,
    /// Their mass, valued at the first knot.
    pub dropped_mass: f64,
}

/// One transported particle: a base weight, its knot chain on the cone, and
/// (once estimated/assembled) knot velocities and Bézier segments.
///
/// Positions, masses, and velocities are stored in the *original* geometry;
/// the segments live in the globally rescaled geometry recorded on the
/// [`AssembledSpline`] that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleTrajectory {
    origin: usize,
    weight: f64,
    points: Vec<ConePoint>,
    velocities: Vec<KnotVelocity>,
    segments: Vec<ConeSplineSegment>,
}

impl ParticleTrajectory {
    /// Builds a bare trajectory (no velocities, no segments).
    ///
    /// # Panics
    ///
    /// Panics on fewer than two knots, dimension disagreements, vertex
    /// knots, or a non-positive weight.
    pub fn new(origin: usize, weight: f64, points: Vec<ConePoint>) -> Self {
        assert!(points.len() >= 2, "need at least two knots");
        assert!(weight > 0.0 && weight.is_finite(), "particle weight must be positive");
        for p in &points {
            assert_eq!(p.dim(), points[0].dim(), "knot dimensions disagree");
            assert!(p.r() > 0.0, "trajectory knots must carry positive mass");
        }
        Self { origin, weight, points, velocities: Vec::new(), segments: Vec::new() }
    }

    /// Builds a trajectory with prescribed knot velocities.
    ///
    /// # Panics
    ///
    /// As [`ParticleTrajectory::new`], plus a velocity per knot with
    /// matching dimension.
    pub fn with_velocities(
        origin: usize,
        weight: f64,
        points: Vec<ConePoint>,
        velocities: Vec<KnotVelocity>,
    ) -> Self {
        let mut traj = Self::new(origin, weight, points);
        assert_eq!(velocities.len(), traj.points.len(), "one velocity per knot");
        for v in &velocities {
            assert_eq!(v.v.len(), traj.points[0].dim(), "velocity dimension mismatch");
        }
        traj.velocities = velocities;
        traj
    }

    /// Index of the first-measure support point that seeded this particle.
    pub fn origin(&self) -> usize {
        self.origin
    }

    /// Base weight `w`; the particle represents mass `w·rᵢ²` at knot `i`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Knot chain on the cone.
    pub fn knots(&self) -> &[ConePoint] {
        &self.points
    }

    /// Estimated knot velocities (empty until estimation).
    pub fn velocities(&self) -> &[KnotVelocity] {
        &self.velocities
    }

    /// Assembled segments in the rescaled geometry (empty until assembly).
    pub fn segments(&self) -> &[ConeSplineSegment] {
        &self.segments
    }

    /// Bundles the knots with times for the feasibility machinery.
    fn to_trajectory_knots(&self, times: &[f64]) -> Vec<TrajectoryKnot> {
        self.points
            .iter()
            .zip(&self.velocities)
            .zip(times)
            .map(|((point, velocity), &time)| TrajectoryKnot {
                time,
                point: point.clone(),
                velocity: velocity.clone(),
            })
            .collect()
    }
}

/// The assembled piecewise spline: all trajectories with segments, the knot
/// times, and the global scale pair the segments live under.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSpline {
    trajectories: Vec<ParticleTrajectory>,
    times: Vec<f64>,
    space_scale: f64,
    time_scale: f64,
}

impl AssembledSpline {
    /// The assembled trajectories.
    pub fn trajectories(&self) -> &[ParticleTrajectory] {
        &self.trajectories
    }

    /// Knot times.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Global position shrink applied before assembly.
    pub fn space_scale(&self) -> f64 {
        self.space_scale
    }

    /// Global velocity damping applied before assembly.
    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }
}

/// A sampled curve of measures with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCurve {
    /// Sample times, knot times included exactly.
    pub times: Vec<f64>,
    /// One measure per sample time; all share the particle count.
    pub measures: Vec<DiscreteMeasure>,
    /// Global position shrink the samples were mapped back through.
    pub space_scale: f64,
    /// Global velocity damping of the assembly.
    pub time_scale: f64,
    /// Solver and bookkeeping diagnostics of the producing run.
    pub diagnostics: PipelineDiagnostics,
}

/// Validates the measure/time preconditions shared by the pipeline stages.
fn check_knot_times(n_measures: usize, times: &[f64]) -> Result<(), PipelineError> {
    if n_measures < 2 {
        return Err(PipelineError::TooFewMeasures { got: n_measures });
    }
    if times.len() != n_measures {
        return Err(PipelineError::KnotCountMismatch { measures: n_measures, times: times.len() });
    }
    for i in 1..times.len() {
        if times[i] <= times[i - 1] {
            return Err(PipelineError::NonMonotoneTimes { index: i });
        }
    }
    Ok(())
}

/// Default regularization for a whole measure sequence: 10⁻³ × the squared
/// bounding-box diagonal of the joint positive support.
pub fn joint_default_epsilon(measures: &[DiscreteMeasure]) -> f64 {
    assert!(!measures.is_empty(), "need at least one measure");
    let mut joint = measures[0].clone();
    for m in &measures[1..] {
        joint = joint.concat(m);
    }
    solver::default_epsilon(&joint, &joint)
}

/// Per-knot mass tables: the values to smooth at composed positions.
struct MassTables {
    /// `tables[i]` holds the values for knot `i + 1` (knot 0 reads its
    /// table exactly, handled separately). For interior knots under the
    /// averaging rule, `backward[i]` holds the incoming-side values.
    forward: Vec<Vec<f64>>,
    backward: Vec<Option<Vec<f64>>>,
}

/// Builds the per-knot value tables for the chosen mass rule.
fn mass_tables(
    measures: &[DiscreteMeasure],
    unit_plans: &[TransportPlan],
    options: &PipelineOptions,
) -> Result<MassTables, PipelineError> {
    let n = measures.len();
    let mut forward = Vec::with_capacity(n - 1);
    let mut backward = Vec::with_capacity(n - 1);
    for knot in 1..n {
        let interior = knot < n - 1;
        let fwd = match (options.mass_rule, interior) {
            // Interior: outgoing plan's source-side ratio on measure `knot`.
            (MassRule::MarginalRatio, true) => {
                density_ratio(&unit_plans[knot], &measures[knot], SolverSide::Source)?.values
            }
            // Final knot: incoming plan's target-side ratio.
            (MassRule::MarginalRatio, false) => {
                density_ratio(&unit_plans[knot - 1], &measures[knot], SolverSide::Target)?.values
            }
            (MassRule::RootWeight, _) => measures[knot].weights().to_vec(),
        };
        forward.push(fwd);
        let bwd = if interior && options.interior_marginal == InteriorMarginalRule::Average {
            Some(match options.mass_rule {
                MassRule::MarginalRatio => {
                    density_ratio(&unit_plans[knot - 1], &measures[knot], SolverSide::Target)?
                        .values
                }
                MassRule::RootWeight => measures[knot].weights().to_vec(),
            })
        } else {
            None
        };
        backward.push(bwd);
    }
    Ok(MassTables { forward, backward })
}

/// Smoothed squared mass for knot `knot ≥ 1` at the composed position `x`.
fn knot_mass_squared(
    knot: usize,
    x: &[f64],
    measures: &[DiscreteMeasure],
    unit_plans: &[TransportPlan],
    tables: &MassTables,
) -> Result<f64, SolverError> {
    let n = measures.len();
    let interior = knot < n - 1;
    let fwd_table = &tables.forward[knot - 1];
    let fwd = if interior {
        // Source side of the outgoing plan.
        kernel_smooth(&unit_plans[knot], &measures[knot], SolverSide::Source, x, fwd_table)?
    } else {
        // Target side of the incoming plan.
        kernel_smooth(&unit_plans[knot - 1], &measures[knot], SolverSide::Target, x, fwd_table)?
    };
    match &tables.backward[knot - 1] {
        Some(bwd_table) => {
            let bwd = kernel_smooth(
                &unit_plans[knot - 1],
                &measures[knot],
                SolverSide::Target,
                x,
                bwd_table,
            )?;
            Ok(0.5 * (fwd + bwd))
        }
        None => Ok(fwd),
    }
}

/// Solves the consecutive transport problems and composes them into one
/// trajectory per surviving support point of the first measure.
///
/// Knot 0 reads its mass table exactly at the support point (the base
/// weight is the unit-rescaled coupling marginal, so `Σ w·r₀²` equals the
/// coupled mass of the first measure); later knots smooth their tables at
/// the composed positions with the plans' entropic kernels. Particles whose
/// first-coupling row carries no mass — or whose mass dies along the way —
/// are dropped and accounted in the diagnostics.
///
/// # Errors
///
/// - [`PipelineError::TooFewMeasures`], [`PipelineError::KnotCountMismatch`],
///   [`PipelineError::NonMonotoneTimes`] on malformed input.
/// - [`PipelineError::DecoupledSegment`] when a consecutive pair shares no
///   transportable mass.
/// - [`PipelineError::AllParticlesVanished`] when no trajectory survives.
/// - Solver errors from the transport solves and map evaluations.
pub fn build_trajectories(
    measures: &[DiscreteMeasure],
    times: &[f64],
    options: &PipelineOptions,
) -> Result<(Vec<ParticleTrajectory>, PipelineDiagnostics), PipelineError> {
    check_knot_times(measures.len(), times)?;
    let epsilon = options.epsilon.unwrap_or_else(|| joint_default_epsilon(measures));

    // Stage 1: the n − 1 consecutive transport problems.
    let mut plans = Vec::with_capacity(measures.len() - 1);
    for (i, pair) in measures.windows(2).enumerate() {
        let plan = solve_entropic(&pair[0], &pair[1], epsilon, options.max_iters, options.tol)?;
        if plan.total_mass() <= 0.0 {
            return Err(PipelineError::DecoupledSegment { segment: i });
        }
        plans.push(plan);
    }
    let diagnostics_segments: Vec<SegmentDiagnostics> = plans
        .iter()
        .zip(measures.windows(2))
        .map(|(plan, pair)| {
            Ok(SegmentDiagnostics {
                iterations: plan.iterations(),
                converged: plan.converged(),
                residual: plan.residual(),
                objective: plan.objective(),
                wfr_distance: solver::wfr_distance(plan, &pair[0], &pair[1])?,
                coupled_mass: plan.total_mass(),
            })
        })
        .collect::<Result<_, SolverError>>()?;

    // Unit-mass rescaling: density ratios and marginals below are all taken
    // against couplings of total mass 1.
    let unit_plans: Vec<TransportPlan> =
        plans.iter().map(|p| p.scaled(1.0 / p.total_mass())).collect();
    let tables = mass_tables(measures, &unit_plans, options)?;

    // Knot-0 data: exact table reads, no smoothing.
    let mu0 = &measures[0];
    let marginal0 = unit_plans[0].source_marginal();
    let table0 = match options.mass_rule {
        MassRule::MarginalRatio => density_ratio(&unit_plans[0], mu0, SolverSide::Source)?.values,
        MassRule::RootWeight => mu0.weights().to_vec(),
    };

    // Stage 2: per-particle map composition.
    let mut trajectories = Vec::new();
    let mut dropped_particles = 0usize;
    let mut dropped_mass = 0.0;
    for k in 0..mu0.len() {
        let weight = marginal0[k];
        if weight <= 0.0 {
            if mu0.weight(k) > 0.0 {
                dropped_particles += 1;
                dropped_mass += mu0.weight(k);
            }
            continue;
        }
        let r0_sq = table0[k];
        let first_knot_mass = weight * r0_sq;
        if r0_sq <= 0.0 {
            dropped_particles += 1;
            continue;
        }
        let mut points = Vec::with_capacity(measures.len());
        points.push(ConePoint::new(mu0.point(k).to_vec(), math::sqrt(r0_sq)));
        let mut x = mu0.point(k).to_vec();
        let mut alive = true;
        for knot in 1..measures.len() {
            x = map_extend(&unit_plans[knot - 1], &measures[knot], &x)?;
            let r_sq = knot_mass_squared(knot, &x, measures, &unit_plans, &tables)?;
            if r_sq <= 0.0 {
                alive = false;
                break;
            }
            points.push(ConePoint::new(x.clone(), math::sqrt(r_sq)));
        }
        if alive {
            trajectories.push(ParticleTrajectory::new(k, weight, points));
        } else {
            dropped_particles += 1;
            dropped_mass += first_knot_mass;
        }
    }
    if trajectories.is_empty() {
        return Err(PipelineError::AllParticlesVanished);
    }

    let diagnostics = PipelineDiagnostics {
        epsilon,
        segments: diagnostics_segments,
        dropped_particles,
        dropped_mass,
    };
    Ok((trajectories, diagnostics))
}

/// Fits natural cubic splines through the particle's position and mass
/// series and stores the knot derivatives on the trajectory.
///
/// # Errors
///
/// Propagates knot-series construction errors (knot/time count mismatch,
/// non-monotone times).
pub fn estimate_knot_velocities(
    traj: ParticleTrajectory,
    times: &[f64],
) -> Result<ParticleTrajectory, PipelineError> {
    if times.len() != traj.points.len() {
        return Err(PipelineError::KnotCountMismatch {
            measures: traj.points.len(),
            times: times.len(),
        });
    }
    let d = traj.points[0].dim();
    // One shared tridiagonal solve: positions and mass occupy d + 1 value
    // components of the same series.
    let mut flat = Vec::with_capacity(times.len() * (d + 1));
    for p in &traj.points {
        flat.extend_from_slice(p.x());
        flat.push(p.r());
    }
    let series = KnotSeries::new(times.to_vec(), flat, d + 1)?;
    let fit = natural_cubic_fit(&series);
    let velocities = (0..times.len())
        .map(|i| {
            let row = fit.velocity(i);
            KnotVelocity::new(row[..d].to_vec(), row[d])
        })
        .collect();
    Ok(ParticleTrajectory { velocities, ..traj })
}

/// The shared feasibility scale pair for a family of trajectories: the
/// smallest position shrink and the largest velocity damping any of them
/// requires.
///
/// A single pair keeps the emitted geometry consistent across particles,
/// and both bounds relax monotonically under further shrinking/damping, so
/// the combined pair remains feasible for each trajectory; that is
/// re-checked defensively, doubling the damping if it ever fails.
///
/// # Panics
///
/// Panics if `trajectories` is empty or a trajectory has no velocities yet.
pub fn joint_required_scales(
    trajectories: &[ParticleTrajectory],
    times: &[f64],
    margin: f64,
) -> (f64, f64) {
    assert!(!trajectories.is_empty(), "no trajectories to scale");
    let mut space_scale = 1.0f64;
    let mut time_scale = 1.0f64;
    for traj in trajectories {
        let knots = traj.to_trajectory_knots(times);
        let (space, time) = bezier::required_scales(&knots, margin);
        space_scale = space_scale.min(space);
        time_scale = time_scale.max(time);
    }
    loop {
        let all_feasible = trajectories.iter().all(|traj| {
            bezier::trajectory_feasible(
                &traj.to_trajectory_knots(times),
                margin,
                space_scale,
                time_scale,
            )
        });
        if all_feasible {
            return (space_scale, time_scale);
        }
        time_scale *= 2.0;
    }
}

/// Applies one global feasibility rescale — the smallest position shrink
/// and velocity damping that make *every* trajectory's segments solvable —
/// and solves all control points.
///
/// # Errors
///
/// As [`build_trajectories`]'s input checks, plus control-point errors
/// (which the rescale guarantee makes unreachable on its own outputs).
///
/// # Panics
///
/// Panics if a trajectory has no velocities yet.
pub fn assemble_spline(
    trajectories: Vec<ParticleTrajectory>,
    times: &[f64],
    margin: f64,
) -> Result<AssembledSpline, PipelineError> {
    assert!(!trajectories.is_empty(), "no trajectories to assemble");
    check_knot_times(trajectories[0].points.len(), times)?;
    let (space_scale, time_scale) = joint_required_scales(&trajectories, times, margin);
    assemble_spline_with_scales(trajectories, times, space_scale, time_scale)
}

/// [`assemble_spline`] with a caller-chosen scale pair instead of the
/// computed feasibility minimum — an experimentation knob for probing how
/// the rescale shapes the curve.
///
/// Nothing certifies the given pair: scales too weak for the trajectories
/// surface as control-point errors.
///
/// # Errors
///
/// As [`build_trajectories`]'s input checks, plus control-point errors for
/// infeasible scale choices.
///
/// # Panics
///
/// Panics if a trajectory has no velocities yet or a scale is not a
/// positive finite number.
pub fn assemble_spline_with_scales(
    trajectories: Vec<ParticleTrajectory>,
    times: &[f64],
    space_scale: f64,
    time_scale: f64,
) -> Result<AssembledSpline, PipelineError> {
    assert!(!trajectories.is_empty(), "no trajectories to assemble");
    assert!(
        space_scale > 0.0 && space_scale.is_finite() && time_scale > 0.0 && time_scale.is_finite(),
        "scales must be positive and finite, got ({space_scale}, {time_scale})"
    );
    check_knot_times(trajectories[0].points.len(), times)?;
    for traj in &trajectories {
        assert_eq!(
            traj.velocities.len(),
            traj.points.len(),
            "assemble_spline needs estimated velocities"
        );
    }

    let trajectories = trajectories
        .into_iter()
        .map(|traj| {
            let scaled =
                bezier::apply_rescale(&traj.to_trajectory_knots(times), space_scale, time_scale);
            let segments = scaled
                .windows(2)
                .map(|w| {
                    control_points(
                        &w[0].point,
                        &w[1].point,
                        &w[0].velocity,
                        &w[1].velocity,
                        w[1].time - w[0].time,
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ParticleTrajectory { segments, ..traj })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;

    Ok(AssembledSpline { trajectories, times: times.to_vec(), space_scale, time_scale })
}

/// Samples the assembled spline on a uniform per-segment grid and emits one
/// discrete measure per sample time.
///
/// Each segment contributes `samples_per_segment` times starting at its
/// left knot; the final knot closes the grid. At knot times the emitted
/// points and masses are the trajectory knots themselves — exactly, with no
/// scale round trip. Between knots, positions map back through the global
/// shrink and each particle carries mass `w·r²`.
///
/// # Errors
///
/// Propagates cascade evaluation errors (unreachable for splines assembled
/// by [`assemble_spline`]).
///
/// # Panics
///
/// Panics if `samples_per_segment` is zero.
pub fn sample_curve(
    spline: &AssembledSpline,
    samples_per_segment: usize,
    diagnostics: &PipelineDiagnostics,
) -> Result<MeasureCurve, PipelineError> {
    assert!(samples_per_segment > 0, "need at least one sample per segment");
    let dim = spline.trajectories[0].points[0].dim();
    let n_seg = spline.times.len() - 1;
    let n_particles = spline.trajectories.len();

    let mut times = Vec::with_capacity(n_seg * samples_per_segment + 1);
    let mut measures = Vec::with_capacity(n_seg * samples_per_segment + 1);
    let emit_knot = |knot: usize, times: &mut Vec<f64>, measures: &mut Vec<DiscreteMeasure>| {
        let mut coords = Vec::with_capacity(n_particles * dim);
        let mut weights = Vec::with_capacity(n_particles);
        for traj in &spline.trajectories {
            let p = &traj.points[knot];
            coords.extend_from_slice(p.x());
            weights.push(traj.weight * p.r() * p.r());
        }
        times.push(spline.times[knot]);
        measures.push(DiscreteMeasure::from_parts(dim, coords, weights));
    };

    for seg in 0..n_seg {
        emit_knot(seg, &mut times, &mut measures);
        let (t0, t1) = (spline.times[seg], spline.times[seg + 1]);
        for j in 1..samples_per_segment {
            let u = j as f64 / samples_per_segment as f64;
            let mut coords = Vec::with_capacity(n_particles * dim);
            let mut weights = Vec::with_capacity(n_particles);
            for traj in &spline.trajectories {
                let p = traj.segments[seg].at(u)?;
                coords.extend(p.x().iter().map(|c| c / spline.space_scale));
                weights.push(traj.weight * p.r() * p.r());
            }
            times.push(t0 + (t1 - t0) * u);
            measures.push(DiscreteMeasure::from_parts(dim, coords, weights));
        }
    }
    emit_knot(n_seg, &mut times, &mut measures);

    Ok(MeasureCurve {
        times,
        measures,
        space_scale: spline.space_scale,
        time_scale: spline.time_scale,
        diagnostics: diagnostics.clone(),
    })
}

/// A particle's segments chained into a single path over `t ∈ [0, 1]`,
/// affinely covering the knot span in the rescaled geometry.
struct ChainedPath<'a> {
    segments: &'a [ConeSplineSegment],
    times: &'a [f64],
}

impl ConePath for ChainedPath<'_> {
    fn at(&self, t: f64) -> Result<ConePoint, GeometryError> {
        let (t0, t1) = (self.times[0], self.times[self.times.len() - 1]);
        let clock = t0 + (t1 - t0) * t;
        // Last interval is closed on the right.
        let seg = (self.times.partition_point(|&ti| ti <= clock))
            .clamp(1, self.times.len() - 1)
            - 1;
        let u = ((clock - self.times[seg]) / (self.times[seg + 1] - self.times[seg]))
            .clamp(0.0, 1.0);
        self.segments[seg].at(u)
    }

    fn dim(&self) -> usize {
        self.segments[0].dim()
    }
}

/// Per-particle and aggregate acceleration cost of an assembled spline.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    /// Squared-acceleration integral of each particle's chained path.
    pub per_particle: Vec<f64>,
    /// Weighted aggregate `Σ w·cost`.
    pub aggregate: f64,
    /// Scale pair the costs were measured under.
    pub space_scale: f64,
    /// See [`AssembledSpline::time_scale`].
    pub time_scale: f64,
}

/// Evaluates the squared covariant acceleration integral of every particle
/// in the rescaled geometry, on the normalized clock `[0, 1]` covering the
/// knot span.
///
/// The chained path is differentiable at interior knots (velocity
/// continuity is built into the control points) but its second derivative
/// may jump there; quadrature nodes adjacent to knots carry that error,
/// which vanishes with the step like any interior discretization error.
///
/// # Errors
///
/// Propagates finite-difference and evaluation errors from the underlying
/// curvature quadrature.
pub fn curve_curvature_report(
    spline: &AssembledSpline,
    n_steps: usize,
    h: f64,
) -> Result<CurvatureReport, PipelineError> {
    let mut per_particle = Vec::with_capacity(spline.trajectories.len());
    let mut aggregate = 0.0;
    for traj in &spline.trajectories {
        let path = ChainedPath { segments: &traj.segments, times: &spline.times };
        let cost = path_curvature_cost(&path, n_steps, h)?;
        aggregate += traj.weight * cost;
        per_particle.push(cost);
    }
    Ok(CurvatureReport {
        per_particle,
        aggregate,
        space_scale: spline.space_scale,
        time_scale: spline.time_scale,
    })
}

/// Runs the full pipeline: solve, compose, estimate, assemble, sample.
pub fn run_pipeline(
    measures: &[DiscreteMeasure],
    times: &[f64],
    options: &PipelineOptions,
    samples_per_segment: usize,
) -> Result<(MeasureCurve, AssembledSpline, PipelineDiagnostics), PipelineError> {
    let (trajectories, diagnostics) = build_trajectories(measures, times, options)?;
    let trajectories = trajectories
        .into_iter()
        .map(|t| estimate_knot_velocities(t, times))
        .collect::<Result<Vec<_>, _>>()?;
    let spline = assemble_spline(trajectories, times, options.margin)?;
    let curve = sample_curve(&spline, samples_per_segment, &diagnostics)?;
    Ok((curve, spline, diagnostics))
}
