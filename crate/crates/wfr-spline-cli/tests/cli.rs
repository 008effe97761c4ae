//! Binary-level tests: argument parsing, exit codes, output layout, and
//! byte determinism, exercised through the real `wfrspline` executable.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

/// Runs the binary with `args` in `dir` and returns the completed output.
fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfrspline"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should launch")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("binary should exit, not be signaled")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout should be JSON")
}

fn write_dirac(path: &Path, x: &[f64], mass: f64) {
    let mut text = String::new();
    for k in 0..x.len() {
        text.push_str(&format!("x{},", k + 1));
    }
    text.push_str("mass\n");
    for c in x {
        text.push_str(&format!("{c},"));
    }
    text.push_str(&format!("{mass}\n"));
    fs::write(path, text).unwrap();
}

#[test]
fn no_arguments_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &[]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [&["--help"], &["--version"]] {
        let out = run(tmp.path(), args);
        assert_eq!(exit_code(&out), 0, "{args:?}");
    }
}

#[test]
fn malformed_measure_csv_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "x1,weight\n0.0,1.0\n").unwrap();
    let good = tmp.path().join("good.csv");
    write_dirac(&good, &[0.5], 1.0);
    let out = run(tmp.path(), &["distance", "bad.csv", "good.csv"]);
    assert_eq!(exit_code(&out), 1);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("header"), "stderr should name the problem: {stderr}");
}

#[test]
fn missing_file_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["distance", "nope.csv", "nope.csv"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn distance_between_separated_diracs_matches_the_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    write_dirac(&tmp.path().join("a.csv"), &[0.0], 1.0);
    // Separation π/3 with unit masses: squared distance 2 − 2·cos(π/3) = 1.
    write_dirac(&tmp.path().join("b.csv"), &[core::f64::consts::FRAC_PI_3], 1.0);
    let out = run(tmp.path(), &["distance", "a.csv", "b.csv", "--epsilon", "0.001"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    let d = report["distance"].as_f64().unwrap();
    assert!((d - 1.0).abs() < 1e-3, "distance {d} should be 1 up to regularization bias");
    assert!(report["converged"].as_bool().unwrap());
}

#[test]
fn identical_measures_are_at_distance_near_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let mu = tmp.path().join("mu.csv");
    fs::write(&mu, "x1,mass\n0.0,1.0\n0.4,0.5\n").unwrap();
    let out = run(tmp.path(), &["distance", "mu.csv", "mu.csv", "--epsilon", "0.01"]);
    assert_eq!(exit_code(&out), 0);
    let d = stdout_json(&out)["distance"].as_f64().unwrap();
    // Entropic bias keeps it off exact zero but far below the scale of the
    // support (0.4).
    assert!(d < 0.1, "self-distance {d} should be regularization-small");
}

#[test]
fn nonconvergence_exits_two_after_printing_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    write_dirac(&tmp.path().join("a.csv"), &[0.0], 1.0);
    write_dirac(&tmp.path().join("b.csv"), &[0.5], 2.0);
    // One iteration cannot meet a 1e-9 tolerance from a cold start.
    let out = run(tmp.path(), &["distance", "a.csv", "b.csv", "--epsilon", "0.001", "--max-iters", "1"]);
    assert_eq!(exit_code(&out), 2);
    let report = stdout_json(&out);
    assert!(!report["converged"].as_bool().unwrap());
    assert_eq!(report["iterations"].as_u64().unwrap(), 1);
}

#[test]
fn spline_writes_outputs_and_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("m0.csv"), "x1,mass\n0.0,1.0\n0.1,0.5\n").unwrap();
    fs::write(tmp.path().join("m1.csv"), "x1,mass\n0.3,1.5\n0.45,0.5\n").unwrap();
    fs::write(tmp.path().join("m2.csv"), "x1,mass\n0.6,0.75\n").unwrap();
    let args = |out: &str| {
        vec![
            "spline".to_string(),
            "m0.csv".into(),
            "m1.csv".into(),
            "m2.csv".into(),
            "--times".into(),
            "0,1,3".into(),
            "--epsilon".into(),
            "0.02".into(),
            "--samples".into(),
            "5".into(),
            "--output".into(),
            out.into(),
        ]
    };
    for out_dir in ["run_a", "run_b"] {
        let argv = args(out_dir);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = run(tmp.path(), &argv);
        assert_eq!(
            exit_code(&out),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }

    let list = |dir: &str| {
        let mut files: Vec<String> = walk(&tmp.path().join(dir))
            .into_iter()
            .map(|p| p.strip_prefix(tmp.path().join(dir)).unwrap().display().to_string())
            .collect();
        files.sort();
        files
    };
    let files = list("run_a");
    assert_eq!(files, list("run_b"));
    assert!(files.contains(&"summary.json".to_string()));
    assert!(files.contains(&"times.csv".to_string()));
    assert!(files.contains(&"trajectories.csv".to_string()));
    // 5 samples × 2 segments + closing knot.
    assert_eq!(files.iter().filter(|f| f.starts_with("curve/")).count(), 11);

    for file in &files {
        let a = fs::read(tmp.path().join("run_a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("run_b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn spline_without_enough_measures_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    write_dirac(&tmp.path().join("m0.csv"), &[0.0], 1.0);
    let out = run(tmp.path(), &["spline", "m0.csv", "--times", "0"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn spline_accepts_a_config_file_with_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    write_dirac(&tmp.path().join("m0.csv"), &[0.0], 1.0);
    write_dirac(&tmp.path().join("m1.csv"), &[0.3], 2.0);
    fs::write(
        tmp.path().join("run.json"),
        r#"{
            "measures": ["m0.csv", "m1.csv"],
            "times": [0.0, 1.0],
            "epsilon": 0.05,
            "samples_per_segment": 2,
            "output": "from_config"
        }"#,
    )
    .unwrap();
    // The flag overrides the config file's output directory.
    let out = run(
        tmp.path(),
        &["spline", "--config", "run.json", "--output", "from_flag"],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("from_flag/summary.json").is_file());
    assert!(!tmp.path().join("from_config").exists());
}

#[test]
fn invalid_config_json_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.json"), r#"{"epsilon": "lots"}"#).unwrap();
    let out = run(tmp.path(), &["spline", "--config", "run.json"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn geodesic_writes_curve_without_a_trajectory_table() {
    let tmp = tempfile::tempdir().unwrap();
    write_dirac(&tmp.path().join("a.csv"), &[0.0, 0.0], 1.0);
    write_dirac(&tmp.path().join("b.csv"), &[0.2, 0.1], 2.0);
    let out = run(
        tmp.path(),
        &["geodesic", "a.csv", "b.csv", "--epsilon", "0.05", "--samples", "8", "--output", "geo"],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let geo = tmp.path().join("geo");
    assert!(geo.join("summary.json").is_file());
    assert!(geo.join("times.csv").is_file());
    assert!(!geo.join("trajectories.csv").exists());
    for k in 0..=8 {
        assert!(geo.join("curve").join(format!("t_{k}.csv")).is_file());
    }
}

#[test]
fn unknown_experiment_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["experiment", "four-dim"]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("one-dim"));
}

#[test]
fn small_two_dim_experiment_runs_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    // A coarse grid keeps this a smoke test; the full resolution belongs to
    // manual runs.
    let out = run(
        tmp.path(),
        &["experiment", "two-dim-subsample", "--resolution", "48", "--subsample", "60", "--output", "exp"],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let base = tmp.path().join("exp/two-dim-subsample");
    for i in 0..4 {
        assert!(base.join("inputs").join(format!("mu_{i}.csv")).is_file());
    }
    assert!(base.join("knots-uniform/summary.json").is_file());
    // Subsampled inputs have exactly the requested support size.
    let text = fs::read_to_string(base.join("inputs/mu_0.csv")).unwrap();
    assert_eq!(text.lines().count() - 1, 60);
}

#[test]
fn verify_passes_by_default_and_honors_filter_and_tolerance() {
    let tmp = tempfile::tempdir().unwrap();

    let out = run(tmp.path(), &["verify"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["failed"].as_u64().unwrap(), 0);
    assert!(report["passed"].as_u64().unwrap() >= 10);

    // Filtering runs only matching checks.
    let out = run(tmp.path(), &["verify", "--filter", "energy-match"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    let names: Vec<String> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert!(!names.is_empty());
    assert!(names.iter().all(|n| n.contains("energy-match")));

    // An unmatchable filter is an input error.
    let out = run(tmp.path(), &["verify", "--filter", "zzz"]);
    assert_eq!(exit_code(&out), 1);

    // An impossible tolerance forces error-bound checks to fail: exit 4.
    let out = run(tmp.path(), &["verify", "--tolerance", "1e-30"]);
    assert_eq!(exit_code(&out), 4);
    let report = stdout_json(&out);
    assert!(report["failed"].as_u64().unwrap() > 0);
}

#[test]
fn verify_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run(tmp.path(), &["verify", "--seed", "7"]);
    let b = run(tmp.path(), &["verify", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

/// Recursively lists all files under `dir`.
fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out
}
