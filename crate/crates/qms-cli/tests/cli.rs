//! End-to-end tests of the `qms` binary: exit codes, output determinism and
//! the shape of the rendered reports.

use std::process::{Command, Output};

fn qms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qms"))
        .args(args)
        .env("QMS_THREADS", "2")
        .output()
        .expect("failed to spawn qms")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Recursively collect every numeric value stored under the given key.
fn find_numbers(v: &serde_json::Value, key: &str, hits: &mut Vec<f64>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                if k == key {
                    if let Some(x) = val.as_f64() {
                        hits.push(x);
                    }
                }
                find_numbers(val, key, hits);
            }
        }
        serde_json::Value::Array(items) => {
            for item in items {
                find_numbers(item, key, hits);
            }
        }
        _ => {}
    }
}

#[test]
fn analyze_depolarizing_reports_closed_form_return_time() {
    let out = qms(&[
        "analyze",
        "--model",
        r#"{"type":"depolarizing","d":2}"#,
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    let mut tcbs = Vec::new();
    find_numbers(&json, "t_cb", &mut tcbs);
    assert_eq!(tcbs.len(), 1, "expected one t_cb in the report");
    let want = 30.0_f64.ln(); // (d²−1)/ε at d=2, ε=0.1
    assert!((tcbs[0] - want).abs() < 1e-4, "t_cb = {} vs {}", tcbs[0], want);
    // The effective configuration is embedded in the report.
    assert!(json.get("config").is_some(), "report embeds its config");
}

#[test]
fn analyze_is_deterministic() {
    let args = [
        "analyze",
        "--model",
        r#"{"type":"nc_birth_death","n":4}"#,
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let a = qms(&args);
    let b = qms(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "same invocation must produce identical bytes");
}

#[test]
fn verify_default_suites_pass_and_are_deterministic() {
    let args = ["verify", "--seed", "3", "--format", "json"];
    let a = qms(&args);
    assert_eq!(a.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&a.stderr));
    let b = qms(&args);
    assert_eq!(a.stdout, b.stdout);
    let json: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let props = json
        .get("properties")
        .and_then(|p| p.as_array())
        .expect("properties array");
    assert!(props.len() >= 7, "expected at least 7 property suites");
    for p in props {
        assert_eq!(p.get("pass"), Some(&serde_json::Value::Bool(true)), "{p}");
    }
}

#[test]
fn verify_rejects_non_cp_channel_with_exit_2() {
    // The transpose map on M_2 (column-stacking convention): positive but
    // not completely positive, so the CP check must flag it.
    let spec = r#"{
        "type": "channel",
        "kind": "superop",
        "dim": 2,
        "payload": [{
            "dim": 4,
            "re": [1,0,0,0, 0,0,1,0, 0,1,0,0, 0,0,0,1],
            "im": [0,0,0,0, 0,0,0,0, 0,0,0,0, 0,0,0,0]
        }]
    }"#;
    let out = qms(&["verify", "--model", spec, "--format", "json"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_model_json_is_an_input_error() {
    let out = qms(&["analyze", "--model", r#"{"type":"depolarizing""#]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_model_field_is_an_input_error() {
    let out = qms(&["analyze", "--model", r#"{"type":"depolarizing","d":2,"oops":1}"#]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn empty_sweep_range_is_an_input_error() {
    let out = qms(&[
        "sweep",
        "--model",
        r#"{"type":"cyclic_graph","d":5}"#,
        "--d-range",
        "9:5",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cyclic_sweep_csv_has_versioned_header_and_fit() {
    let out = qms(&[
        "sweep",
        "--model",
        r#"{"type":"cyclic_graph","d":5}"#,
        "--d-range",
        "5:13",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# qms-csv v1"));
    assert!(text.lines().any(|l| l.starts_with("# config:")));
    assert!(text.lines().any(|l| l.starts_with("# fit:")));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header line");
    assert_eq!(
        header,
        "model,d,lambda,t_cb,C_cb,bound_tcb,bound_index,best_lower,decay_pass"
    );
    // One data row per odd d in 5..=13.
    let rows = text.lines().filter(|l| l.starts_with("cyclic_d")).count();
    assert_eq!(rows, 5);
}
