//! Subcommand implementations.
//!
//! Commands that write files write *everything* they computed before
//! reporting a nonconvergence failure, so diagnostics always reach disk;
//! the nonzero exit code is the machine-readable verdict.

use std::path::{Path, PathBuf};

use wfr_spline_core::cone::{ConeGeodesic, ConePoint};
use wfr_spline_core::measure::DiscreteMeasure;
use wfr_spline_core::pipeline::{
    assemble_spline_with_scales, build_trajectories, curve_curvature_report,
    estimate_knot_velocities, joint_required_scales, sample_curve, MeasureCurve,
};
use wfr_spline_core::solver::{default_epsilon, solve_entropic, wfr_distance};
use wfr_spline_core::verify::{standard_suite, Comparison};

use crate::config::{Overrides, RunConfig, SubsampleSpec};
use crate::io;
use crate::presets;
use crate::report::{
    self, CheckReport, CurvatureSummary, DistanceReport, GeodesicSummary, SegmentReport,
    SplineSummary, VerifyReport,
};
use crate::CliError;

/// Quadrature steps per unit of normalized time in the curvature report.
/// The squared-acceleration integrand is smooth inside segments, so 100
/// steps resolve it to well below the finite-difference noise floor.
const CURVATURE_STEPS: usize = 100;

/// Central-difference step of the curvature report on the normalized
/// clock: small enough for O(h²) truncation to be negligible, large
/// enough to stay clear of cancellation at f64 precision.
const CURVATURE_FD_STEP: f64 = 1e-4;

/// Output directory used when neither the config nor `--output` names one.
const DEFAULT_OUTPUT: &str = "out";

/// Support points drawn per measure when the subsampled experiment runs
/// without an explicit count.
const DEFAULT_SUBSAMPLE: usize = 300;

/// Loads the optional config file, overlays explicit arguments and flag
/// overrides, and validates the result.
pub fn resolve_config(
    config_path: Option<&Path>,
    measures: &[PathBuf],
    times: Option<&[f64]>,
    overrides: &Overrides,
) -> Result<RunConfig, CliError> {
    let mut config = match config_path {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if !measures.is_empty() {
        config.measures = measures.to_vec();
    }
    if let Some(times) = times {
        config.times = times.to_vec();
    }
    overrides.apply(&mut config);
    config.validate()?;
    Ok(config)
}

/// Computes the transport distance between two measure files and prints a
/// JSON report on stdout.
///
/// # Errors
///
/// Input errors for unreadable measures; [`CliError::Nonconvergence`]
/// (after printing the report) when the solver stops at its iteration cap.
pub fn cmd_distance(
    source: &Path,
    target: &Path,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let config = resolve_config(None, &[], None, overrides)?;
    let measures = [io::read_measure(source)?, io::read_measure(target)?];
    ensure_epsilon_inferable(&config, &measures)?;
    let epsilon = config
        .epsilon
        .unwrap_or_else(|| default_epsilon(&measures[0], &measures[1]));
    let plan = solve_entropic(&measures[0], &measures[1], epsilon, config.max_iters, config.tol)?;
    let distance = wfr_distance(&plan, &measures[0], &measures[1])?;
    let report = DistanceReport {
        distance,
        squared: distance * distance,
        epsilon,
        iterations: plan.iterations(),
        converged: plan.converged(),
        residual: plan.residual(),
        coupled_mass: plan.total_mass(),
    };
    io::print_json(&report);
    if !plan.converged() {
        return Err(CliError::Nonconvergence {
            iterations: plan.iterations(),
            residual: plan.residual(),
        });
    }
    Ok(())
}

/// Interpolates two measure files along per-particle geodesics and writes
/// the sampled curve plus a summary to the output directory.
///
/// The coupling and mass bookkeeping reuse the spline pipeline on the knot
/// pair; the interpolation itself is the closed-form geodesic of each
/// particle, so no velocity estimation or control-point solve is involved
/// and no trajectory table is written (there are no knot velocities to
/// report).
///
/// # Errors
///
/// Input errors for unreadable measures or configs; nonconvergence (after
/// writing all files) when the coupling solve stops at its cap.
pub fn cmd_geodesic(
    source: &Path,
    target: &Path,
    config_path: Option<&Path>,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let config = resolve_config(config_path, &[], None, overrides)?;
    let measures = [io::read_measure(source)?, io::read_measure(target)?];
    ensure_epsilon_inferable(&config, &measures)?;
    let options = config.pipeline_options();
    let (trajectories, diagnostics) = build_trajectories(&measures, &[0.0, 1.0], &options)?;

    // The widest particle jump decides a shared position shrink: geodesics
    // exist only for separations strictly inside the π/2 ball.
    let max_sep = trajectories
        .iter()
        .map(|traj| position_distance(traj.knots()[0].x(), traj.knots()[1].x()))
        .fold(0.0f64, f64::max);
    let target_sep = core::f64::consts::FRAC_PI_2 * (1.0 - config.margin);
    let mut space_scale = if max_sep > target_sep { target_sep / max_sep } else { 1.0 };
    // A zero margin aims exactly at the cut; back off until every scaled
    // separation is strictly inside it.
    while space_scale > 0.0 && max_sep * space_scale >= core::f64::consts::FRAC_PI_2 {
        space_scale *= 0.999_999;
    }

    let scale_point = |p: &ConePoint| {
        ConePoint::new(p.x().iter().map(|c| c * space_scale).collect(), p.r())
    };
    let geodesics: Vec<ConeGeodesic> = trajectories
        .iter()
        .map(|traj| {
            ConeGeodesic::new(scale_point(&traj.knots()[0]), scale_point(&traj.knots()[1]))
        })
        .collect::<Result<_, _>>()?;

    let dim = measures[0].dim();
    let n = config.samples_per_segment;
    let mut times = Vec::with_capacity(n + 1);
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let u = k as f64 / n as f64;
        let mut coords = Vec::with_capacity(trajectories.len() * dim);
        let mut weights = Vec::with_capacity(trajectories.len());
        if k == 0 || k == n {
            // Endpoints come straight from the knot chain: exact
            // coordinates, no scale round trip.
            let knot = usize::from(k == n);
            for traj in &trajectories {
                let p = &traj.knots()[knot];
                coords.extend_from_slice(p.x());
                weights.push(traj.weight() * p.r() * p.r());
            }
        } else {
            for (traj, geo) in trajectories.iter().zip(&geodesics) {
                let p = geo.eval(u);
                coords.extend(p.x().iter().map(|c| c / space_scale));
                weights.push(traj.weight() * p.r() * p.r());
            }
        }
        times.push(u);
        samples.push(DiscreteMeasure::from_parts(dim, coords, weights));
    }

    let summary = GeodesicSummary {
        epsilon: diagnostics.epsilon,
        wfr_distance: diagnostics.segments[0].wfr_distance,
        space_scale,
        particle_count: trajectories.len(),
        dropped_particles: diagnostics.dropped_particles,
        dropped_mass: diagnostics.dropped_mass,
        input_masses: measures.iter().map(DiscreteMeasure::total_mass).collect(),
        knot_masses: report::knot_masses(&trajectories, 2),
        sample_count: samples.len(),
        segments: report::segment_reports(&diagnostics),
    };
    let dir = output_dir(&config);
    let curve =
        MeasureCurve { times, measures: samples, space_scale, time_scale: 1.0, diagnostics };
    io::write_curve(&dir, &curve)?;
    io::write_json(&dir.join("summary.json"), &summary)?;
    fail_on_unconverged(&summary.segments)
}

/// Fits the interpolating spline through a sequence of measure files and
/// writes the sampled curve, trajectory table, and summary to the output
/// directory.
///
/// # Errors
///
/// Input errors for unreadable measures or inconsistent knot data;
/// nonconvergence (after writing all files) when any segment solve stops
/// at its cap; geometry errors only when hand-forced scales are too weak
/// for the trajectories.
pub fn cmd_spline(
    measure_paths: &[PathBuf],
    config_path: Option<&Path>,
    times: Option<&[f64]>,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let config = resolve_config(config_path, measure_paths, times, overrides)?;
    if config.measures.len() < 2 {
        return Err(CliError::Input(format!(
            "need at least two measures, got {}",
            config.measures.len()
        )));
    }
    let measures = config
        .measures
        .iter()
        .map(|p| io::read_measure(p))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = output_dir(&config);
    let summary = run_spline_to_dir(&measures, &config.times, &config, &dir)?;
    fail_on_unconverged(&summary.segments)
}

/// Runs one of the built-in experiments, writing its input measures and
/// one output set per knot-time spacing under the output directory:
///
/// - `one-dim`: the one-dimensional family on its default grid, under
///   three knot spacings (`knots-early`, `knots-uniform`, `knots-late`);
/// - `two-dim-grid`: the two-dimensional family on its default grid;
/// - `two-dim-subsample`: the same family subsampled to 300 support
///   points per measure (seed 0) before transport.
///
/// `--sigma`, `--resolution`, `--subsample`, and `--seed` reshape the
/// generated inputs; the remaining overrides tune the run itself.
///
/// # Errors
///
/// Input errors for unknown experiment names or invalid overrides;
/// nonconvergence (after writing everything) when any solve stops at its
/// cap.
pub fn cmd_experiment(name: &str, overrides: &Overrides) -> Result<(), CliError> {
    let mut config = RunConfig::default();
    if name == "two-dim-subsample" {
        config.subsample = Some(SubsampleSpec { count: DEFAULT_SUBSAMPLE, seed: 0 });
    }
    overrides.apply(&mut config);
    config.validate()?;

    let (mut measures, time_sets) = match name {
        "one-dim" => {
            let sigma = config.sigma.unwrap_or(presets::ONE_DIM_SIGMA);
            let grid = match &overrides.resolution {
                None => presets::one_dim_grid(),
                Some(r) => presets::one_dim_grid_n(resolution_for::<1>(r)?[0]),
            };
            (presets::one_dim_measures(sigma, &grid), presets::one_dim_time_sets())
        }
        "two-dim-grid" | "two-dim-subsample" => {
            let sigma = config.sigma.unwrap_or(presets::TWO_DIM_SIGMA);
            let grid = match &overrides.resolution {
                None => presets::two_dim_grid(),
                Some(r) => presets::two_dim_grid_n(resolution_for::<2>(r)?),
            };
            (presets::two_dim_measures(sigma, &grid), presets::two_dim_time_sets())
        }
        _ => {
            return Err(CliError::Input(format!(
                "unknown experiment {name:?}; available: one-dim, two-dim-grid, two-dim-subsample"
            )))
        }
    };
    if let Some(sub) = config.subsample {
        measures = measures
            .iter()
            .map(|m| m.subsample_support(sub.count, sub.seed))
            .collect::<Result<Vec<_>, _>>()?;
    }

    let base = output_dir(&config).join(name);
    for (i, mu) in measures.iter().enumerate() {
        io::write_measure(&base.join("inputs").join(format!("mu_{i}.csv")), mu)?;
    }
    let mut segments = Vec::new();
    for (slug, times) in &time_sets {
        let summary = run_spline_to_dir(&measures, times, &config, &base.join(slug))?;
        segments.extend(summary.segments);
    }
    fail_on_unconverged(&segments)
}

/// Runs the numerical verification suite and prints its report on stdout.
///
/// `filter` keeps only checks whose name contains the given substring;
/// `tolerance` replaces the threshold of every error-bound (at-most)
/// check, leaving order-of-accuracy (at-least) checks untouched.
///
/// # Errors
///
/// [`CliError::Input`] when the filter matches nothing or the tolerance is
/// not positive; [`CliError::Verification`] when any check fails.
pub fn cmd_verify(
    filter: Option<&str>,
    seed: u64,
    tolerance: Option<f64>,
) -> Result<(), CliError> {
    if let Some(tol) = tolerance {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Input(format!("tolerance must be positive, got {tol}")));
        }
    }
    let mut checks = standard_suite(seed);
    if let Some(f) = filter {
        let available: Vec<&str> = checks.iter().map(|c| c.name).collect();
        checks.retain(|c| c.name.contains(f));
        if checks.is_empty() {
            return Err(CliError::Input(format!(
                "no verification check matches {f:?}; available: {}",
                available.join(", ")
            )));
        }
    }
    if let Some(tol) = tolerance {
        for check in &mut checks {
            if matches!(check.comparison, Comparison::AtMost) {
                check.threshold = tol;
                check.pass = check.observed <= tol;
            }
        }
    }
    let total = checks.len();
    let failed = checks.iter().filter(|c| !c.pass).count();
    let report = VerifyReport {
        seed,
        passed: total - failed,
        failed,
        checks: checks.iter().map(CheckReport::from).collect(),
    };
    io::print_json(&report);
    if failed > 0 {
        return Err(CliError::Verification { failed, total });
    }
    Ok(())
}

/// Runs the full spline pipeline on in-memory measures and writes the
/// standard output set — `curve/t_<k>.csv`, `times.csv`,
/// `trajectories.csv`, `summary.json` — under `dir`.
///
/// This is the engine of `spline` and `experiment`; it does not fail on
/// solver nonconvergence (the returned summary carries the per-segment
/// verdicts for the caller to act on).
pub fn run_spline_to_dir(
    measures: &[DiscreteMeasure],
    times: &[f64],
    config: &RunConfig,
    dir: &Path,
) -> Result<SplineSummary, CliError> {
    ensure_epsilon_inferable(config, measures)?;
    let options = config.pipeline_options();
    let (trajectories, diagnostics) = build_trajectories(measures, times, &options)?;
    let trajectories = trajectories
        .into_iter()
        .map(|traj| estimate_knot_velocities(traj, times))
        .collect::<Result<Vec<_>, _>>()?;

    let (space_scale, time_scale) = match (config.space_scale, config.time_scale) {
        (Some(s), Some(t)) => (s, t),
        (forced_space, forced_time) => {
            let (s, t) = joint_required_scales(&trajectories, times, config.margin);
            (forced_space.unwrap_or(s), forced_time.unwrap_or(t))
        }
    };
    let spline = assemble_spline_with_scales(trajectories, times, space_scale, time_scale)?;
    let curve = sample_curve(&spline, config.samples_per_segment, &diagnostics)?;
    let curvature = curve_curvature_report(&spline, CURVATURE_STEPS, CURVATURE_FD_STEP)?;

    io::write_curve(dir, &curve)?;
    io::write_trajectories(&dir.join("trajectories.csv"), spline.trajectories())?;
    let summary = SplineSummary {
        epsilon: diagnostics.epsilon,
        knot_times: times.to_vec(),
        space_scale,
        time_scale,
        particle_count: spline.trajectories().len(),
        dropped_particles: diagnostics.dropped_particles,
        dropped_mass: diagnostics.dropped_mass,
        input_masses: measures.iter().map(DiscreteMeasure::total_mass).collect(),
        knot_masses: report::knot_masses(spline.trajectories(), times.len()),
        sample_count: curve.measures.len(),
        samples_per_segment: config.samples_per_segment,
        segments: report::segment_reports(&diagnostics),
        curvature: CurvatureSummary::new(&curvature, CURVATURE_STEPS, CURVATURE_FD_STEP),
    };
    io::write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// The configured output directory, or [`DEFAULT_OUTPUT`].
fn output_dir(config: &RunConfig) -> PathBuf {
    config.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

/// Errors with the worst unconverged segment, if any segment failed to
/// converge.
fn fail_on_unconverged(segments: &[SegmentReport]) -> Result<(), CliError> {
    match segments
        .iter()
        .filter(|s| !s.converged)
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
    {
        Some(worst) => Err(CliError::Nonconvergence {
            iterations: worst.iterations,
            residual: worst.residual,
        }),
        None => Ok(()),
    }
}

/// When no regularization is configured, the default derives from the
/// joint positive support's bounding box, which must have positive extent
/// to set a length scale.
fn ensure_epsilon_inferable(
    config: &RunConfig,
    measures: &[DiscreteMeasure],
) -> Result<(), CliError> {
    if config.epsilon.is_some() {
        return Ok(());
    }
    let dim = measures[0].dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for mu in measures {
        for (x, w) in mu.iter() {
            if w > 0.0 {
                for k in 0..dim {
                    lo[k] = lo[k].min(x[k]);
                    hi[k] = hi[k].max(x[k]);
                }
            }
        }
    }
    let diag2: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum();
    if diag2 > 0.0 && diag2.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(
            "the joint support has no positive extent, so no default regularization \
             scale exists; pass --epsilon"
                .into(),
        ))
    }
}

/// Parses a `--resolution` override for a `D`-dimensional preset grid: one
/// shared value or one per axis, each at least 2.
fn resolution_for<const D: usize>(r: &[usize]) -> Result<[usize; D], CliError> {
    let expanded: [usize; D] = if r.len() == 1 {
        [r[0]; D]
    } else if r.len() == D {
        let mut out = [0usize; D];
        out.copy_from_slice(r);
        out
    } else {
        return Err(CliError::Input(format!(
            "--resolution takes 1 or {D} values, got {}",
            r.len()
        )));
    };
    if let Some(bad) = expanded.iter().find(|&&n| n < 2) {
        return Err(CliError::Input(format!("grid resolution must be at least 2, got {bad}")));
    }
    Ok(expanded)
}

/// Euclidean distance between two position vectors.
fn position_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn dirac(dim: usize, x: &[f64], mass: f64) -> DiscreteMeasure {
        let mut mu = DiscreteMeasure::new(dim);
        mu.push(x, mass);
        mu
    }

    #[test]
    fn spline_run_writes_the_full_output_set() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        let measures = vec![
            dirac(1, &[0.0], 1.0),
            dirac(1, &[0.3], 2.0),
            dirac(1, &[0.6], 1.0),
        ];
        // An explicit epsilon keeps the iteration count small; this test is
        // about output layout, not solver accuracy.
        let config = RunConfig {
            samples_per_segment: 4,
            epsilon: Some(0.05),
            ..RunConfig::default()
        };
        let summary =
            run_spline_to_dir(&measures, &[0.0, 1.0, 2.0], &config, &dir).unwrap();

        assert!(dir.join("summary.json").is_file());
        assert!(dir.join("times.csv").is_file());
        assert!(dir.join("trajectories.csv").is_file());
        // 4 samples per segment × 2 segments + the closing knot.
        assert_eq!(summary.sample_count, 9);
        for k in 0..9 {
            assert!(dir.join("curve").join(format!("t_{k}.csv")).is_file());
        }
        assert_eq!(summary.segments.len(), 2);
        assert!(summary.segments.iter().all(|s| s.converged));

        // Knot masses are exact at the ends of the chain by construction.
        assert!((summary.knot_masses[0] - 1.0).abs() < 1e-9);
        assert!((summary.knot_masses[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spline_runs_are_byte_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let measures = vec![dirac(1, &[0.0], 1.0), dirac(1, &[0.5], 1.5)];
        let config = RunConfig {
            samples_per_segment: 3,
            epsilon: Some(0.05),
            ..RunConfig::default()
        };
        for dir in ["a", "b"] {
            run_spline_to_dir(&measures, &[0.0, 1.0], &config, &tmp.path().join(dir)).unwrap();
        }
        for file in ["summary.json", "times.csv", "trajectories.csv", "curve/t_2.csv"] {
            let a = fs::read(tmp.path().join("a").join(file)).unwrap();
            let b = fs::read(tmp.path().join("b").join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
    }

    #[test]
    fn geodesic_writes_curve_and_summary() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("mu0.csv");
        let dst = tmp.path().join("mu1.csv");
        io::write_measure(&src, &dirac(1, &[0.0], 1.0)).unwrap();
        io::write_measure(&dst, &dirac(1, &[0.4], 2.0)).unwrap();
        let out = tmp.path().join("geo");
        let overrides = Overrides {
            output: Some(out.clone()),
            samples_per_segment: Some(4),
            epsilon: Some(0.05),
            ..Overrides::default()
        };
        cmd_geodesic(&src, &dst, None, &overrides).unwrap();
        assert!(out.join("summary.json").is_file());
        for k in 0..=4 {
            assert!(out.join("curve").join(format!("t_{k}.csv")).is_file());
        }
        // No velocity data exists for a geodesic, so no trajectory table.
        assert!(!out.join("trajectories.csv").exists());

        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        let masses = summary["knot_masses"].as_array().unwrap();
        assert!((masses[0].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert!((masses[1].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_experiment_is_an_input_error() {
        let err = cmd_experiment("three-dim", &Overrides::default()).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn degenerate_support_needs_an_explicit_epsilon() {
        let measures = [dirac(1, &[0.5], 1.0), dirac(1, &[0.5], 2.0)];
        let config = RunConfig::default();
        assert!(matches!(
            ensure_epsilon_inferable(&config, &measures),
            Err(CliError::Input(_))
        ));
        let with_eps = RunConfig { epsilon: Some(0.1), ..RunConfig::default() };
        ensure_epsilon_inferable(&with_eps, &measures).unwrap();
    }

    #[test]
    fn resolution_overrides_expand_per_axis() {
        assert_eq!(resolution_for::<2>(&[64]).unwrap(), [64, 64]);
        assert_eq!(resolution_for::<2>(&[64, 32]).unwrap(), [64, 32]);
        assert!(resolution_for::<2>(&[64, 32, 16]).is_err());
        assert!(resolution_for::<1>(&[1]).is_err());
    }

    #[test]
    fn verify_filter_must_match_something() {
        let err = cmd_verify(Some("no-such-check"), 0, None).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
    }
}
