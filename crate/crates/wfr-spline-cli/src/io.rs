//! File formats: measure CSV read/write, sampled-curve output layout,
//! trajectory tables, and JSON report writing.
//!
//! A measure CSV has the header `x1,...,xd,mass` followed by one support
//! point per row. All floats are written through Rust's shortest
//! round-trip formatting, so identical inputs produce byte-identical
//! outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use wfr_spline_core::measure::DiscreteMeasure;
use wfr_spline_core::pipeline::{MeasureCurve, ParticleTrajectory};

use crate::CliError;

/// Reads a measure from a CSV file with header `x1,...,xd,mass`.
///
/// Every coordinate must be finite and every mass finite and non-negative;
/// violations are reported as input errors naming the row.
///
/// # Errors
///
/// [`CliError::Input`] on unreadable files, a malformed header, ragged
/// rows, unparseable numbers, or out-of-range values.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    if headers.len() < 2 || &headers[headers.len() - 1] != "mass" {
        return Err(CliError::Input(format!(
            "{}: header must be x1,...,xd,mass",
            path.display()
        )));
    }
    let dim = headers.len() - 1;
    for k in 0..dim {
        if headers[k] != format!("x{}", k + 1) {
            return Err(CliError::Input(format!(
                "{}: column {} must be named x{}, got {:?}",
                path.display(),
                k + 1,
                k + 1,
                &headers[k]
            )));
        }
    }

    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| CliError::Input(format!("{} row {}: {e}", path.display(), row + 1)))?;
        if record.len() != dim + 1 {
            return Err(CliError::Input(format!(
                "{} row {}: expected {} fields, got {}",
                path.display(),
                row + 1,
                dim + 1,
                record.len()
            )));
        }
        let parse = |field: &str, what: &str| -> Result<f64, CliError> {
            field.parse::<f64>().map_err(|_| {
                CliError::Input(format!(
                    "{} row {}: {what} {field:?} is not a number",
                    path.display(),
                    row + 1
                ))
            })
        };
        for k in 0..dim {
            let c = parse(&record[k], "coordinate")?;
            if !c.is_finite() {
                return Err(CliError::Input(format!(
                    "{} row {}: coordinate {c} is not finite",
                    path.display(),
                    row + 1
                )));
            }
            coords.push(c);
        }
        let mass = parse(&record[dim], "mass")?;
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(CliError::Input(format!(
                "{} row {}: mass {mass} must be finite and non-negative",
                path.display(),
                row + 1
            )));
        }
        weights.push(mass);
    }
    if weights.is_empty() {
        return Err(CliError::Input(format!("{}: no support points", path.display())));
    }
    Ok(DiscreteMeasure::from_parts(dim, coords, weights))
}

/// Renders a measure to CSV text with header `x1,...,xd,mass`.
pub fn measure_to_csv(measure: &DiscreteMeasure) -> String {
    let mut out = String::new();
    for k in 0..measure.dim() {
        let _ = write!(out, "x{},", k + 1);
    }
    out.push_str("mass\n");
    for (point, weight) in measure.iter() {
        for c in point {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{weight}");
    }
    out
}

/// Writes a measure CSV (see [`measure_to_csv`]).
///
/// # Errors
///
/// [`CliError::Input`] when the file cannot be written.
pub fn write_measure(path: &Path, measure: &DiscreteMeasure) -> Result<(), CliError> {
    write_text(path, &measure_to_csv(measure))
}

/// Writes a sampled curve under `dir`: one measure CSV per sample at
/// `curve/t_<k>.csv` plus a `times.csv` index mapping `k` to its sample
/// time.
///
/// # Errors
///
/// [`CliError::Input`] when a file or directory cannot be created.
pub fn write_curve(dir: &Path, curve: &MeasureCurve) -> Result<(), CliError> {
    let curve_dir = dir.join("curve");
    fs::create_dir_all(&curve_dir).map_err(|e| {
        CliError::Input(format!("cannot create {}: {e}", curve_dir.display()))
    })?;
    for (k, measure) in curve.measures.iter().enumerate() {
        write_measure(&curve_dir.join(format!("t_{k}.csv")), measure)?;
    }
    let mut index = String::from("k,t\n");
    for (k, t) in curve.times.iter().enumerate() {
        let _ = writeln!(index, "{k},{t}");
    }
    write_text(&dir.join("times.csv"), &index)
}

/// Writes the per-particle knot table: one row per (particle, knot) with
/// the cone coordinates and the estimated knot velocity, header
/// `particle,knot,x1,...,xd,r,v1,...,vd,s`.
///
/// Positions and velocities are in the original (unscaled) geometry.
///
/// # Errors
///
/// [`CliError::Input`] when the file cannot be written.
///
/// # Panics
///
/// Panics if any trajectory lacks velocity estimates; callers write this
/// table only after velocity estimation.
pub fn write_trajectories(
    path: &Path,
    trajectories: &[ParticleTrajectory],
) -> Result<(), CliError> {
    let mut out = String::new();
    if let Some(first) = trajectories.first() {
        let d = first.knots()[0].dim();
        out.push_str("particle,knot");
        for k in 0..d {
            let _ = write!(out, ",x{}", k + 1);
        }
        out.push_str(",r");
        for k in 0..d {
            let _ = write!(out, ",v{}", k + 1);
        }
        out.push_str(",s\n");
    }
    for (id, traj) in trajectories.iter().enumerate() {
        assert_eq!(
            traj.velocities().len(),
            traj.knots().len(),
            "trajectory table requires velocity estimates"
        );
        for (knot, (point, velocity)) in traj.knots().iter().zip(traj.velocities()).enumerate() {
            let _ = write!(out, "{id},{knot}");
            for c in point.x() {
                let _ = write!(out, ",{c}");
            }
            let _ = write!(out, ",{}", point.r());
            for c in &velocity.v {
                let _ = write!(out, ",{c}");
            }
            let _ = writeln!(out, ",{}", velocity.s);
        }
    }
    write_text(path, &out)
}

/// Serializes `value` as pretty JSON with a trailing newline.
///
/// # Panics
///
/// Panics if the value cannot be serialized; report types are plain data
/// and always serialize.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    text
}

/// Writes `value` as pretty JSON to `path`.
///
/// # Errors
///
/// [`CliError::Input`] when the file cannot be written.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_text(path, &to_json_string(value))
}

/// Prints `value` as pretty JSON on stdout.
pub fn print_json<T: Serialize>(value: &T) {
    print!("{}", to_json_string(value));
}

/// Writes a text file, creating parent directories as needed.
fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Input(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
