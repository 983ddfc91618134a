//! End-to-end tests driving the compiled `necklace` binary.

use std::path::Path;
use std::process::{Command, Output};

fn necklace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_necklace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn survey_reports_the_gasket_bound() {
    let out = necklace(&["survey", "builtin:gasket", "--level-cap", "2"]);
    let report = stdout_json(&out);
    assert_eq!(report["N2"], 1);
    assert_eq!(report["extremal"].as_array().unwrap().len(), 3);
    assert_eq!(report["verdicts"]["matches_prediction"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = necklace(&["survey", "builtin:good4", "--level-cap", "1", "--threads", "3"]);
    let b = necklace(&["survey", "builtin:good4", "--level-cap", "1", "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn rigid_lists_the_six_triangle_symmetries() {
    let out = necklace(&["rigid", "builtin:gasket", "builtin:gasket", "--depth", "6"]);
    let report = stdout_json(&out);
    let names: Vec<&str> = report["maps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["r0", "r1", "r2", "s0", "s1", "s2"]);
    assert_eq!(report["verdict"]["kind"], "Closed");
}

#[test]
fn negative_verdicts_still_exit_zero() {
    let out = necklace(&["goodness", "builtin:crowded4"]);
    let report = stdout_json(&out);
    assert_eq!(report["good"], false);
    assert_eq!(report["witnesses"][0][0], 3);
    assert_eq!(report["witnesses"][0][1], 1);
}

#[test]
fn malformed_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"v\": 1, \"n\": 3").unwrap();
    let out = necklace(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty(), "expected a diagnostic on stderr");

    let schema_bad = dir.path().join("two.json");
    std::fs::write(&schema_bad, r#"{"v": 1, "n": 2, "label": "x", "glue": []}"#).unwrap();
    let out = necklace(&["validate", schema_bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_file_exits_three() {
    let out = necklace(&["validate", "/nonexistent/nothing.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_one() {
    let out = necklace(&["survey", "builtin:gasket", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = necklace(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = necklace(&[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = necklace(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("survey"));
}

#[test]
fn cell_cap_from_environment_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_necklace"))
        .args(["survey", "builtin:gasket", "--level-cap", "2"])
        .env("NECKLACE_MAX_CELLS", "10")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn bad_environment_override_exits_one() {
    let out = Command::new(env!("CARGO_BIN_EXE_necklace"))
        .args(["survey", "builtin:gasket"])
        .env("NECKLACE_MAX_CELLS", "lots")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn components_rejects_a_malformed_address() {
    let out = necklace(&["components", "builtin:gasket", "not-an-address"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn components_reports_the_severed_halves() {
    let out = necklace(&["components", "builtin:gasket", "1(2)", "1(3)"]);
    let report = stdout_json(&out);
    assert_eq!(report["is_cut"], true);
    assert_eq!(report["N"], 1);
    assert_eq!(
        report["components"]["components"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn render_writes_svg_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("gasket.svg");
    let out = necklace(&[
        "render",
        "builtin:gasket",
        "--out",
        svg_path.to_str().unwrap(),
        "--level",
        "2",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["cells"], 9);
    assert_eq!(report["marks"], 3);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("z1"));
}

#[test]
fn render_without_out_flag_is_a_usage_error() {
    let out = necklace(&["render", "builtin:gasket"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn builtin_without_geometry_cannot_be_rendered() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("x.svg");
    let out = necklace(&[
        "render",
        "builtin:good4",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn catalog_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = necklace(&["catalog", "--out-dir", dir.path().to_str().unwrap()]);
    let entries = stdout_json(&out);
    let names: Vec<&str> = entries
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["gasket", "good4", "crowded4"]);

    for name in ["gasket", "good4", "crowded4"] {
        let spec = dir.path().join(format!("{name}.spec.json"));
        let out = necklace(&["validate", spec.to_str().unwrap()]);
        let report = stdout_json(&out);
        assert_eq!(report["pass"], true, "{name} round-trip validates");
    }
    assert!(dir.path().join("gasket.ifs.json").exists());
    assert!(dir.path().join("crowded4.ifs.json").exists());
    assert!(!dir.path().join("good4.ifs.json").exists());
}

#[test]
fn extraction_from_a_file_matches_the_builtin_survey() {
    let dir = tempfile::tempdir().unwrap();
    necklace(&["catalog", "--out-dir", dir.path().to_str().unwrap()]);
    let ifs = dir.path().join("crowded4.ifs.json");
    let out = necklace(&["extract", ifs.to_str().unwrap()]);
    let report = stdout_json(&out);
    let rules: Vec<(i64, &str, &str)> = report["confidence"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c["k"].as_i64().unwrap(),
                c["u"].as_str().unwrap(),
                c["v"].as_str().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        rules,
        [
            (1, "(3)", "(3)"),
            (2, "1(3)", "1(3)"),
            (3, "11(3)", "(3)"),
            (4, "1(3)", "1(3)"),
        ]
    );
}

#[test]
fn uniqueness_suite_passes_for_the_square_necklace() {
    let out = necklace(&["uniqueness", "builtin:good4", "--level-cap", "1"]);
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
    assert_eq!(report["entries"].as_array().unwrap().len(), 8);
}

#[test]
fn theorems_suite_passes_for_the_gasket() {
    let out = necklace(&["theorems", "builtin:gasket", "--level-cap", "1"]);
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
}

fn write_gasket_spec(path: &Path) {
    let out = necklace(&["catalog", "--out-dir", path.parent().unwrap().to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn file_and_builtin_inputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("gasket.spec.json");
    write_gasket_spec(&spec_path);
    let from_file = necklace(&["survey", spec_path.to_str().unwrap(), "--level-cap", "1"]);
    let from_builtin = necklace(&["survey", "builtin:gasket", "--level-cap", "1"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_builtin.stdout);
}
