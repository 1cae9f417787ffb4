//! End-to-end checks of the binary: exit codes, JSON shapes, and the
//! stdout/stderr split, driven through real temp files.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bellcheck() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bellcheck"))
}

/// Writes `content` to a unique temp file and returns its path.
fn temp_file(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("bellcheck-test-{}-{name}", std::process::id()));
    std::fs::write(&path, content).expect("write temp file");
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_ghz_pair_violates() {
    let state = temp_file("ghz2.json", r#"{"n_qubits": 2, "kind": "ghz"}"#);
    let out = bellcheck().arg("analyze").arg(&state).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_text(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["violated"], Value::Bool(true));
    let tmod = &doc["criteria"][0];
    assert_eq!(tmod["id"], "tmod");
    assert!((tmod["value"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-4);
    assert_eq!(tmod["verdict"], "violated");
    assert_eq!(tmod["guarantee"], "necessary-and-sufficient");
    assert_eq!(doc["general"]["settings_source"], "optimized");
    assert!((doc["general"]["value"].as_f64().unwrap() - 4.0 * std::f64::consts::SQRT_2).abs() < 1e-4);
    assert_eq!(doc["lhv"]["exists"], Value::Bool(false));
    assert!(stderr_text(&out).contains("verdict: violated"));
}

#[test]
fn analyze_werner_below_threshold_is_local() {
    let state = temp_file("w3.json", r#"{"n_qubits": 3, "kind": "werner", "v": 0.45}"#);
    let out = bellcheck().arg("analyze").arg(&state).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_text(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["violated"], Value::Bool(false));
    assert!((doc["werner"]["threshold"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(doc["werner"]["exceeds_threshold"], Value::Bool(false));
    assert_eq!(doc["lhv"]["exists"], Value::Bool(true));
    let sectors = doc["lhv"]["sectors"].as_array().unwrap();
    assert_eq!(sectors.len(), 8);
    assert!((doc["lhv"]["noise_weight"].as_f64().unwrap() - 0.1).abs() < 1e-9);
}

#[test]
fn analyze_rejects_non_positive_matrix() {
    let state = temp_file(
        "bad.json",
        r#"{"n_qubits": 1, "kind": "dense", "re": [[0.5, 0.9], [0.9, 0.5]]}"#,
    );
    let out = bellcheck().arg("analyze").arg(&state).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_text(&out).contains("eigenvalue"));
}

#[test]
fn analyze_rejects_unknown_criterion_id() {
    let state = temp_file("ghz2-unk.json", r#"{"n_qubits": 2, "kind": "ghz"}"#);
    let out = bellcheck()
        .args(["analyze", state.to_str().unwrap(), "--criteria", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_text(&out).contains("unknown violation test"));
}

#[test]
fn analyze_rejects_unsupported_criterion() {
    let state = temp_file("w3-hor.json", r#"{"n_qubits": 3, "kind": "werner", "v": 0.45}"#);
    let out = bellcheck()
        .args(["analyze", state.to_str().unwrap(), "--criteria", "horodecki"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_text(&out).contains("does not support 3 qubits"));
}

#[test]
fn analyze_quiet_silences_stderr() {
    let state = temp_file("ghz2-q.json", r#"{"n_qubits": 2, "kind": "ghz"}"#);
    let out = bellcheck()
        .args(["analyze", state.to_str().unwrap(), "--quiet"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stderr.is_empty());
}

#[test]
fn analyze_at_given_settings_reports_them() {
    let state = temp_file("ghz2-s.json", r#"{"n_qubits": 2, "kind": "ghz"}"#);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let settings = temp_file(
        "chsh.json",
        &format!(
            r#"{{"n_qubits": 2, "directions": [[[1,0,0],[0,0,1]], [[{s},0,{s}],[{s},0,{}]]]}}"#,
            -s
        ),
    );
    let out = bellcheck()
        .args([
            "analyze",
            state.to_str().unwrap(),
            "--settings",
            settings.to_str().unwrap(),
            "--quiet",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_text(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["general"]["settings_source"], "given");
    assert!((doc["general"]["value"].as_f64().unwrap() - 4.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    for entry in doc["general"]["table"].as_array().unwrap() {
        assert!((entry.as_f64().unwrap().abs() - s).abs() < 1e-12);
    }
}

/// Same input, same defaults: the report must be byte-identical apart
/// from timings.
#[test]
fn analyze_report_is_deterministic() {
    let state = temp_file("ghz3-det.json", r#"{"n_qubits": 3, "kind": "ghz"}"#);
    let run = || {
        let out = bellcheck()
            .args(["analyze", state.to_str().unwrap(), "--quiet"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(3));
        let mut doc = stdout_json(&out);
        doc.as_object_mut().unwrap().remove("timings_ms");
        doc
    };
    let first = run();
    let echoed = temp_file("ghz3-echo.json", &first["input"].to_string());
    let out = bellcheck()
        .args(["analyze", echoed.to_str().unwrap(), "--quiet"])
        .output()
        .unwrap();
    let mut second = stdout_json(&out);
    second.as_object_mut().unwrap().remove("timings_ms");
    assert_eq!(first, second);
}

#[test]
fn oracle_flags_unsatisfiable_table() {
    let table = temp_file("pr.json", r#"{"n_qubits": 2, "entries": [1, 1, 1, -1]}"#);
    let out = bellcheck().arg("oracle").arg(&table).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let doc = stdout_json(&out);
    assert_eq!(doc["value"].as_f64().unwrap(), 8.0);
    assert_eq!(doc["bound"].as_f64().unwrap(), 4.0);
    assert_eq!(doc["exists"], Value::Bool(false));
    assert!(doc.get("sectors").is_none());
    assert!(stderr_text(&out).contains("no local model"));
}

#[test]
fn oracle_builds_model_on_boundary() {
    let table = temp_file(
        "half.json",
        r#"{"n_qubits": 2, "entries": [0.5, 0.5, 0.5, -0.5]}"#,
    );
    let out = bellcheck().arg("oracle").arg(&table).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["exists"], Value::Bool(true));
    assert!(doc["noise_weight"].as_f64().unwrap().abs() < 1e-12);
    let sectors = doc["sectors"].as_array().unwrap();
    assert_eq!(sectors.len(), 4);
    for sector in sectors {
        assert!((sector["probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
}

#[test]
fn oracle_all_ones_is_one_deterministic_sector() {
    let table = temp_file(
        "ones3.json",
        r#"{"n_qubits": 3, "entries": [1, 1, 1, 1, 1, 1, 1, 1]}"#,
    );
    let out = bellcheck().arg("oracle").arg(&table).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["exists"], Value::Bool(true));
    let sectors = doc["sectors"].as_array().unwrap();
    assert_eq!(sectors.len(), 1);
    assert_eq!(sectors[0]["signs"], serde_json::json!([1, 1, 1]));
    assert_eq!(sectors[0]["probability"].as_f64().unwrap(), 1.0);
    assert_eq!(sectors[0]["sign"].as_i64().unwrap(), 1);
}

#[test]
fn oracle_rejects_wrong_entry_count() {
    let table = temp_file("short.json", r#"{"n_qubits": 2, "entries": [1, 1, 1]}"#);
    let out = bellcheck().arg("oracle").arg(&table).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_rejects_five_qubits() {
    let entries: Vec<String> = (0..32).map(|_| "0.1".to_string()).collect();
    let table = temp_file(
        "big.json",
        &format!(r#"{{"n_qubits": 5, "entries": [{}]}}"#, entries.join(", ")),
    );
    let out = bellcheck().arg("oracle").arg(&table).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_text(&out).contains("4 qubits"));
}

#[test]
fn sweep_werner_crosses_at_inverse_sqrt_two() {
    let out = bellcheck()
        .args([
            "sweep", "--kind", "werner", "--n", "2", "--from", "0.6", "--to", "0.8", "--step",
            "0.05",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_text(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["kind"], "werner");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let row = |v: f64| {
        rows.iter()
            .find(|r| (r["parameter"].as_f64().unwrap() - v).abs() < 1e-12)
            .unwrap()
    };
    assert_eq!(row(0.70)["violated"], Value::Bool(false));
    assert!(row(0.70)["max_tmod"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert_eq!(row(0.75)["violated"], Value::Bool(true));
    assert!(row(0.75)["max_tmod"].as_f64().unwrap() > 1.0);
}

#[test]
fn sweep_werner_four_qubits_crosses_near_one_over_sqrt_eight() {
    let out = bellcheck()
        .args([
            "sweep", "--kind", "werner", "--n", "4", "--from", "0.3", "--to", "0.4", "--step",
            "0.05", "--quiet",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_text(&out));
    let rows_doc = stdout_json(&out);
    let rows = rows_doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["violated"], Value::Bool(false), "0.35 < 1/sqrt(8)");
    assert_eq!(rows[2]["violated"], Value::Bool(true), "0.40 > 1/sqrt(8)");
    let tmods: Vec<f64> = rows.iter().map(|r| r["max_tmod"].as_f64().unwrap()).collect();
    assert!(tmods.windows(2).all(|w| w[0] <= w[1] + 1e-9), "monotone in v");
}

#[test]
fn sweep_ghz_gives_single_row() {
    let out = bellcheck()
        .args(["sweep", "--kind", "ghz", "--n", "3", "--quiet"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let doc = stdout_json(&out);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0]["parameter"].is_null());
    assert!((rows[0]["max_tmod"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn sweep_rejects_empty_range() {
    let out = bellcheck()
        .args(["sweep", "--kind", "werner", "--n", "2", "--from", "0.8", "--to", "0.6"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_text(&out).contains("empty range"));
}
