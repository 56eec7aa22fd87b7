use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bellprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellprobe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|x| x.as_f64().expect("number"))
        .collect()
}

fn write_params(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const FIG2A: &str = r#"{"g_a": 1, "omega_ra": 5, "delta_a": 102, "delta_b0": 122,
    "Delta_a": 120, "Delta_b0": 100, "delta_1": 0, "n_ph": 3}"#;
const FIG2C: &str = r#"{"g_a": 1, "omega_ra": 5, "delta_a": 102, "delta_b0": 122,
    "Delta_a": 100, "Delta_b0": 120, "delta_1": 0, "n_ph": 3}"#;

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identify_worked_example() {
    let v = stdout_json(&bellprobe(&["identify", "--coeffs", "0.4,0.3,0.2,0.1"]));
    assert_eq!(v["schema_version"], 1);
    for (got, want) in floats(&v["m"]).iter().zip([0.2, 0.0, 0.4]) {
        assert!((got - want).abs() < 1e-12);
    }
    for (got, want) in floats(&v["recovered"]).iter().zip([0.4, 0.3, 0.2, 0.1]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn identify_uniform_and_pure() {
    let v = stdout_json(&bellprobe(&["identify", "--coeffs", "0.25,0.25,0.25,0.25"]));
    assert!(floats(&v["m"]).iter().all(|m| m.abs() < 1e-12));

    let v = stdout_json(&bellprobe(&["identify", "--coeffs", "1,0,0,0"]));
    for (got, want) in floats(&v["recovered"]).iter().zip([1.0, 0.0, 0.0, 0.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    assert!(v["residual_trace_distance"].as_f64().unwrap() < 1e-10);
}

#[test]
fn invalid_coefficients_exit_with_config_code() {
    for coeffs in ["0.5,0.3,0.2,0.1", "-0.1,0.5,0.3,0.3", "0.5,0.5"] {
        let out = bellprobe(&["identify", "--coeffs", coeffs]);
        assert_eq!(out.status.code(), Some(2), "{coeffs}");
    }
    assert_eq!(bellprobe(&["sample"]).status.code(), Some(2));
}

#[test]
fn sample_is_accurate_and_deterministic() {
    let args = [
        "sample",
        "--coeffs",
        "0.4,0.3,0.2,0.1",
        "--shots",
        "100000",
        "--seed",
        "42",
    ];
    let first = bellprobe(&args);
    let v = stdout_json(&first);
    for (got, want) in floats(&v["c_hat"]).iter().zip([0.4, 0.3, 0.2, 0.1]) {
        assert!((got - want).abs() < 0.01);
    }
    assert_eq!(floats(&v["std_err"]).len(), 4);
    assert_eq!(first.stdout, bellprobe(&args).stdout);
}

#[test]
fn single_shot_is_exact_for_deterministic_steps() {
    // c = (1,0,0,0): steps 1 and 2 always read +1.
    let v = stdout_json(&bellprobe(&[
        "sample", "--coeffs", "1,0,0,0", "--shots", "1",
    ]));
    let m = floats(&v["m_hat"]);
    assert_eq!(m[0], 1.0);
    assert_eq!(m[1], 1.0);
}

#[test]
fn verify_passes_with_small_errors() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("verify.json");
    let out = bellprobe(&["verify", "--out", path_str(&out_path)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    for check in checks {
        assert_eq!(check["pass"], true, "{check}");
        assert!(check["max_error"].as_f64().unwrap() < 1e-10);
        if check["check_name"]
            .as_str()
            .unwrap()
            .starts_with("factorization")
        {
            assert!(check["max_error"].as_f64().unwrap() < 1e-12);
        }
    }
}

#[test]
fn qed_sim_fig2a_tracks_effective_curve() {
    let dir = TempDir::new().unwrap();
    let params = write_params(&dir, "fig2a.json", FIG2A);
    let csv = dir.path().join("series.csv");
    let out = bellprobe(&[
        "qed-sim",
        "--params",
        path_str(&params),
        "--step",
        "1",
        "--out",
        path_str(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,full,effective"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 511);
    let deviation = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    assert!(deviation < 0.15, "deviation {deviation}");
    let mantissa = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    assert!(
        mantissa
            .split('e')
            .next()
            .unwrap()
            .replace(['-', '.'], "")
            .len()
            >= 12
    );

    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema_version"], 1);
    let lambda = summary["lambda"].as_f64().unwrap();
    assert!(lambda > 0.0);
    assert!(summary["gate_time"].as_f64().unwrap() > 0.0);
    assert!((summary["max_deviation"].as_f64().unwrap() - deviation).abs() < 1e-9);
    for key in ["delta1_tuned", "omega_b", "leakage"] {
        assert!(summary[key].is_number(), "{key}");
    }
}

#[test]
fn qed_sim_without_drive_is_constant() {
    let dir = TempDir::new().unwrap();
    let params = write_params(
        &dir,
        "idle.json",
        r#"{"g_a": 1, "omega_ra": 0, "delta_a": 102, "delta_b0": 122,
            "Delta_a": 120, "Delta_b0": 100, "delta_1": 0, "n_ph": 2}"#,
    );
    let csv = dir.path().join("idle.csv");
    let out = bellprobe(&[
        "qed-sim",
        "--params",
        path_str(&params),
        "--step",
        "1",
        "--t-max",
        "50",
        "--n-samples",
        "11",
        "--out",
        path_str(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() < 1e-12);
        assert!((v[1] + 1.0).abs() < 1e-12);
    }
}

#[test]
fn qed_sim_rejects_degenerate_grid_and_bad_params() {
    let dir = TempDir::new().unwrap();
    let params = write_params(&dir, "fig2a.json", FIG2A);
    let csv = dir.path().join("x.csv");
    let out = bellprobe(&[
        "qed-sim",
        "--params",
        path_str(&params),
        "--step",
        "1",
        "--t-max",
        "0",
        "--n-samples",
        "3",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Derived quantities are not accepted as input.
    let with_gb = write_params(
        &dir,
        "gb.json",
        r#"{"g_a": 1, "g_b": 1, "omega_ra": 5, "delta_a": 102, "delta_b0": 122,
            "Delta_a": 120, "Delta_b0": 100, "delta_1": 0, "n_ph": 3}"#,
    );
    let out = bellprobe(&[
        "qed-sim",
        "--params",
        path_str(&with_gb),
        "--step",
        "1",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let low_cutoff = write_params(
        &dir,
        "n1.json",
        &FIG2A.replace("\"n_ph\": 3", "\"n_ph\": 1"),
    );
    let out = bellprobe(&[
        "qed-fidelity",
        "--params",
        path_str(&low_cutoff),
        "--step",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qed_fidelity_full_model_steps_one_and_three() {
    let dir = TempDir::new().unwrap();
    for (name, body, step) in [("a.json", FIG2A, "1"), ("c.json", FIG2C, "3")] {
        let params = write_params(&dir, name, body);
        let v = stdout_json(&bellprobe(&[
            "qed-fidelity",
            "--params",
            path_str(&params),
            "--step",
            step,
        ]));
        assert_eq!(v["schema_version"], 1);
        assert!(v["fidelity"].as_f64().unwrap() >= 0.95, "step {step}: {v}");
        assert_eq!(v["warning"], false);
        for key in ["leakage", "gate_time", "lambda_used"] {
            assert!(v[key].is_number(), "{key}");
        }
    }
}

#[test]
fn qed_fidelity_effective_mode_is_exact() {
    let dir = TempDir::new().unwrap();
    for (name, body, step) in [
        ("a.json", FIG2A, "1"),
        ("b.json", FIG2A, "2"),
        ("c.json", FIG2C, "3"),
    ] {
        let params = write_params(&dir, name, body);
        let v = stdout_json(&bellprobe(&[
            "qed-fidelity",
            "--params",
            path_str(&params),
            "--step",
            step,
            "--effective-only",
        ]));
        assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10, "{v}");
        assert_eq!(v["leakage"].as_f64().unwrap(), 0.0);
    }
}
