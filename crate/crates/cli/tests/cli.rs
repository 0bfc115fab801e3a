use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn geoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoflow"))
        .args(args)
        .env_remove("GEOFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn identities_pass_on_both_tori() {
    let out = geoflow(&[
        "verify-identities",
        "--dim",
        "1",
        "--seed",
        "42",
        "--samples",
        "50",
        "--tol",
        "1e-9",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["pass"], true);

    let out = geoflow(&[
        "verify-identities",
        "--dim",
        "2",
        "--seed",
        "42",
        "--samples",
        "50",
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let lie = report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == "lie_formula")
        .unwrap();
    assert!(lie["max_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn unreachable_tolerance_fails_with_residuals() {
    let out = geoflow(&[
        "verify-identities",
        "--dim",
        "1",
        "--samples",
        "5",
        "--tol",
        "1e-16",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("max residual"));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn identity_report_goes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identities.json");
    let out = geoflow(&[
        "verify-identities",
        "--samples",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(report["suites"].as_array().unwrap().len(), 10);
}

#[test]
fn curvature_on_the_circle() {
    let out = geoflow(&[
        "verify-curvature",
        "--dim",
        "1",
        "--samples",
        "200",
        "--seed",
        "42",
        "--tol",
        "1e-8",
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert!((report["expected_curvature"].as_f64().unwrap() - 0.1591549431).abs() < 1e-10);
    assert_eq!(report["pass"], true);
    assert_eq!(report["samples"], 200);
}

#[test]
fn curvature_on_the_torus() {
    let out = geoflow(&[
        "verify-curvature",
        "--dim",
        "2",
        "--samples",
        "50",
        "--seed",
        "7",
        "--tol",
        "1e-6",
    ]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["expected_curvature"].as_f64().unwrap() - 0.0253302959).abs() < 1e-10);
}

#[test]
fn curvature_reports_are_reproducible() {
    let args = [
        "verify-curvature",
        "--dim",
        "1",
        "--samples",
        "12",
        "--seed",
        "3",
    ];
    let a = without_timestamp(json(&geoflow(&args)));
    let b = without_timestamp(json(&geoflow(&args)));
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&geoflow(&["verify-curvature", "--samples", "0"])), 2);
    assert_eq!(code(&geoflow(&["verify-curvature", "--dim", "3"])), 2);
    assert_eq!(code(&geoflow(&["no-such-command"])), 2);
    assert_eq!(code(&geoflow(&["verify-curvature", "--modes", "99"])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_geoflow"))
        .args(["verify-identities", "--samples", "2"])
        .env("GEOFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn thread_cap_does_not_change_results() {
    let args = [
        "verify-curvature",
        "--dim",
        "1",
        "--samples",
        "8",
        "--seed",
        "9",
    ];
    let capped = Command::new(env!("CARGO_BIN_EXE_geoflow"))
        .args(args)
        .env("GEOFLOW_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&capped), 0);
    assert_eq!(
        without_timestamp(json(&capped)),
        without_timestamp(json(&geoflow(&args)))
    );
}

#[test]
fn simulate_hs_cosine() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("run.csv");
    let out = geoflow(&[
        "simulate",
        config("hs_cosine.json").to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    assert_eq!(summary["status"], "completed");
    assert_eq!(summary["velocity_representative"], "gradient");
    assert!(summary["energy_drift"].as_f64().unwrap() <= 1e-8);

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header.join(","),
        "t,energy,mass,mean_sigma,max_abs_sigma,max_abs_rho"
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    assert_eq!(rows.last().unwrap()[0], 1.0);
}

#[test]
fn simulate_stationary_rows_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("run.csv");
    let out = geoflow(&[
        "simulate",
        config("stationary_rho.json").to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1)
        .collect();
    assert!(rows.len() > 2);
    assert!(rows.iter().all(|r| *r == rows[0]));
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1, \"dimension\": ").unwrap();
    let csv_path = dir.path().join("never.csv");
    let out = geoflow(&[
        "simulate",
        bad.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!csv_path.exists());

    std::fs::write(
        &bad,
        r#"{"schema_version": 1, "dimension": 1, "points_per_axis": 64, "dt": 0.01,
            "t_end": 0.1, "output_every": 1, "initial": {"preset": "hs_cosine"}, "colour": "red"}"#,
    )
    .unwrap();
    let out = geoflow(&[
        "simulate",
        bad.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!csv_path.exists());
}

#[test]
fn simulate_reports_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("steep.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "dimension": 1, "points_per_axis": 64, "dt": 0.01,
            "t_end": 1.0, "output_every": 1, "initial": {"sigma_coeffs": [[1, 100, 0]]}}"#,
    )
    .unwrap();
    let csv_path = dir.path().join("steep.csv");
    let out = geoflow(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let summary = json(&out);
    assert_eq!(summary["status"], "blowup");
    assert!(summary["blowup"]["t"].as_f64().unwrap() < 1.0);
    assert!(csv_path.exists());
}

#[test]
fn crosscheck_exit_codes() {
    let out = geoflow(&[
        "crosscheck-1d",
        "--seed",
        "42",
        "--resolution",
        "256",
        "--t-end",
        "0.1",
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert!(report["sigma_sup_diff"].as_f64().unwrap() <= 1e-6);
    assert!(report["rho_sup_diff"].as_f64().unwrap() <= 1e-6);

    let out = geoflow(&[
        "crosscheck-1d",
        "--seed",
        "42",
        "--resolution",
        "16",
        "--t-end",
        "0.1",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["status"], "mismatch");

    let out = geoflow(&[
        "crosscheck-1d",
        "--seed",
        "42",
        "--resolution",
        "256",
        "--t-end",
        "1.0",
        "--amplitude",
        "50",
    ]);
    assert_eq!(code(&out), 3);
    let report = json(&out);
    assert!(report["spectral_blowup_t"].as_f64().unwrap() < 1.0);
    assert!(report["literal_blowup_t"].as_f64().unwrap() < 1.0);
}
