//! End-to-end tests of the binary: grammar, determinism, exit codes, and
//! file handling.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cauchykit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("test file written");
    path
}

#[test]
fn sample_is_byte_deterministic() {
    let a = run(&[
        "sample", "--dist", "cauchy", "--gamma", "0+1i", "-n", "5", "--seed", "7",
    ]);
    let b = run(&[
        "sample", "--dist", "cauchy", "--gamma", "0+1i", "-n", "5", "--seed", "7",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_of(&a).lines().count(), 5);

    let c = run(&[
        "sample", "--dist", "cauchy", "--gamma", "0+1i", "-n", "5", "--seed", "8",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sample_round_trips_through_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    let out = run(&[
        "sample",
        "--dist",
        "cauchy",
        "--gamma",
        "2+3i",
        "-n",
        "5000",
        "--seed",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let fit = run(&[
        "fit",
        "--estimator",
        "mle",
        "--in",
        path.to_str().unwrap(),
        "--json",
    ]);
    assert!(fit.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&fit)).unwrap();
    assert_eq!(report["converged"], true);
    let re = report["estimate"]["re"].as_f64().unwrap();
    let im = report["estimate"]["im"].as_f64().unwrap();
    assert!((re - 2.0).abs() <= 0.2, "re {re}");
    assert!((im - 3.0).abs() <= 0.2, "im {im}");
}

#[test]
fn fit_two_points_matches_fixed_point_example() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "two.csv", "-1\n1\n");
    let fit = run(&[
        "fit",
        "--estimator",
        "mle",
        "--in",
        path.to_str().unwrap(),
        "--json",
    ]);
    assert!(fit.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&fit)).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["estimate"]["re"].as_f64().unwrap().abs() <= 1e-12);
    assert!((report["estimate"]["im"].as_f64().unwrap() - 1.0).abs() <= 1e-12);

    // Identical invocations produce byte-identical JSON.
    let again = run(&[
        "fit",
        "--estimator",
        "mle",
        "--in",
        path.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(fit.stdout, again.stdout);
}

#[test]
fn fit_human_output_mentions_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "two.csv", "-1\n1\n");
    let fit = run(&["fit", "--estimator", "logmoment", "--in", path.to_str().unwrap()]);
    assert!(fit.status.success());
    let text = stdout_of(&fit);
    assert!(text.contains("estimate:"), "{text}");
}

#[test]
fn test_subcommand_emits_schema_json() {
    let dir = tempfile::tempdir().unwrap();
    // A dense Cauchy quantile grid: cheap, deterministic, clearly null.
    let mut body = String::new();
    for k in 0..200 {
        let p = (k as f64 + 0.5) / 200.0;
        let x = (std::f64::consts::PI * (p - 0.5)).tan();
        body.push_str(&format!("{x}\n"));
    }
    let path = write_file(dir.path(), "null.csv", &body);
    let out = run(&[
        "test", "--method", "mobius", "--in", path.to_str().unwrap(), "--B", "99", "--seed", "3",
    ]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(report["statistic"].as_f64().unwrap() >= 0.0);
    let p = report["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert_eq!(report["B"], 99);
    assert!(report["grid"].is_array());
    assert!(report["null_gamma"]["im"].as_f64().unwrap() > 0.0);
    // Clean Cauchy data must not be rejected.
    assert!(p > 0.05, "p = {p}");
}

#[test]
fn verify_passes_on_small_grid() {
    let out = run(&[
        "verify",
        "--gamma-grid",
        "0+1i,1+2i",
        "--a-grid",
        "0.3,0.5",
        "--tol-report",
    ]);
    assert!(out.status.success(), "{out:?}");
    let families: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(families.is_array());
    for family in families.as_array().unwrap() {
        assert_eq!(family["pass"], true, "{family}");
        assert!(family["worst_error"].as_f64().unwrap() <= family["tolerance"].as_f64().unwrap());
    }

    // Table form mentions the overall verdict.
    let table = run(&["verify", "--gamma-grid", "0+1i", "--a-grid", "0.5"]);
    assert!(table.status.success());
    assert!(stdout_of(&table).contains("overall: PASS"));
}

#[test]
fn field_matches_closed_form_for_two_points() {
    // For the sample {-1, 1} the field is F(gamma) = 1/conj(gamma): the
    // gamma = i row reads (0, 1) and off-circle rows deviate.
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "two.csv", "-1\n1\n");
    let out_path = dir.path().join("field.csv");
    let out = run(&[
        "field",
        "--in",
        path.to_str().unwrap(),
        "--grid",
        "0+1i,1+1i,-1+1i,0+2i,1+2i,-1+2i,0+0.5i,1+0.5i,-1+0.5i",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let d = cols[0] * cols[0] + cols[1] * cols[1];
        let (want_re, want_im) = (cols[0] / d, cols[1] / d);
        assert!((cols[2] - want_re).abs() <= 1e-10, "{line}");
        assert!((cols[3] - want_im).abs() <= 1e-10, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 9);
    assert!(text.lines().nth(1).unwrap().starts_with("0,1,0,1"));
}

#[test]
fn user_errors_exit_one() {
    // Unknown flag.
    let out = run(&["sample", "--dist", "cauchy", "--gamma", "0+1i", "-n", "3", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));

    // Malformed complex literal.
    let out = run(&["sample", "--dist", "cauchy", "--gamma", "zzz", "-n", "3"]);
    assert_eq!(out.status.code(), Some(1));

    // Parameter outside the half-plane.
    let out = run(&["sample", "--dist", "cauchy", "--gamma", "1-1i", "-n", "3"]);
    assert_eq!(out.status.code(), Some(1));

    // Missing input file.
    let out = run(&["fit", "--estimator", "mle", "--in", "/nonexistent/file.csv"]);
    assert_eq!(out.status.code(), Some(1));

    // Malformed data row (with its line number in the message).
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "bad.csv", "1.0\nnot-a-number\n");
    let out = run(&["fit", "--estimator", "mle", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");

    // Degenerate sample.
    let path = write_file(dir.path(), "point.csv", "4\n4\n");
    let out = run(&["fit", "--estimator", "mle", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_two() {
    // An all-positive sample leaves the Mellin consensus with no
    // half-plane estimates: a numerical failure, not a usage error.
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "pos.csv", "0.5\n1.0\n2.0\n4.0\n");
    let out = run(&["fit", "--estimator", "mellin", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn failed_write_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let missing_dir = dir.path().join("no-such-dir");
    let target = missing_dir.join("out.csv");
    let out = run(&[
        "sample",
        "--dist",
        "cauchy",
        "--gamma",
        "0+1i",
        "-n",
        "3",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists());
}

#[test]
fn circular_sampling_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("angles.csv");
    let out = run(&[
        "sample",
        "--dist",
        "circular",
        "--w",
        "0.5",
        "-n",
        "20000",
        "--seed",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let fit = run(&[
        "fit",
        "--estimator",
        "circular",
        "--in",
        path.to_str().unwrap(),
        "--json",
    ]);
    assert!(fit.status.success(), "{fit:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&fit)).unwrap();
    let re = report["estimate"]["re"].as_f64().unwrap();
    let im = report["estimate"]["im"].as_f64().unwrap();
    assert!((re - 0.5).abs() <= 0.02, "re {re}");
    assert!(im.abs() <= 0.02, "im {im}");
}

#[test]
fn mixture_sampling_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mix.csv");
    let out = run(&[
        "sample",
        "--dist",
        "mixture",
        "--t",
        "0.5",
        "--gamma1",
        "-2+1i",
        "--gamma2",
        "2+1i",
        "-n",
        "100000",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let fit = run(&[
        "fit",
        "--estimator",
        "mixture",
        "--in",
        path.to_str().unwrap(),
        "--seed",
        "0",
        "--json",
    ]);
    assert!(fit.status.success(), "{fit:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&fit)).unwrap();
    let t = report["estimate"]["t"].as_f64().unwrap();
    let g1re = report["estimate"]["gamma1"]["re"].as_f64().unwrap();
    let g2re = report["estimate"]["gamma2"]["re"].as_f64().unwrap();
    assert!((t - 0.5).abs() <= 0.15, "t {t}");
    assert!((g1re + 2.0).abs() <= 0.15, "gamma1 re {g1re}");
    assert!((g2re - 2.0).abs() <= 0.15, "gamma2 re {g2re}");
}
