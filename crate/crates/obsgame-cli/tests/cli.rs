//! End-to-end checks of the binary: output shape, determinism, exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obsgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn vstar_reports_dimension() {
    let path = scenario_dir().join("example2_case1.json");
    let out = run(&["vstar", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("dim V* = 3"), "{text}");
}

#[test]
fn game_csv_shape_and_determinism() {
    let path = scenario_dir().join("example2_case1.json");
    let first = run(&["game", path.to_str().unwrap()]);
    let second = run(&["game", path.to_str().unwrap()]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "reruns must be byte-identical");
    assert_eq!(first.stderr, second.stderr);
    let csv = String::from_utf8(first.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epoch,actor,phi,dim_vstar,max_geo_mult"));
    assert_eq!(csv.lines().count(), 21, "header plus one row per epoch");
    let summary = String::from_utf8(first.stderr).unwrap();
    assert!(summary.contains("mode: oscillation"), "{summary}");
    assert!(summary.contains("loop period: 4"), "{summary}");
}

#[test]
fn game_out_file_and_summary_split() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("trace.csv");
    let scenario = scenario_dir().join("example2_case2.json");
    let out = run(&[
        "game",
        scenario.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("epoch,actor,phi"));
    assert_eq!(csv.lines().count(), 13);
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("mode: lock"), "{summary}");
}

#[test]
fn horizon_flag_truncates() {
    let path = scenario_dir().join("example2_case1_free.json");
    let out = run(&["game", path.to_str().unwrap(), "--horizon", "1"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("1,attacker,1,"));
}

#[test]
fn parse_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["game", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let rotation = dir.path().join("rotation.json");
    // the plant has eigenvalues ±i, outside the supported class
    std::fs::write(
        &rotation,
        r#"{"name": "rotation", "a": [[0, 1], [-1, 0]], "b": [[0], [1]], "m": 1, "horizon": 4}"#,
    )
    .unwrap();
    let out = run(&["game", rotation.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("epoch 1"), "{err}");
}

#[test]
fn reduce_reports_relative_degree() {
    let path = scenario_dir().join("chain_reduce.json");
    let out = run(&["reduce", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("relative degree: [2, 2]"), "{text}");
    assert!(text.contains("internal dynamics: yes"), "{text}");
}

#[test]
fn override_flag_replaces_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let matrix_file = dir.path().join("c.json");
    std::fs::write(&matrix_file, "[[1, 0, 0, 1, 1], [0, 0, 1, 0, 0]]").unwrap();
    let scenario = scenario_dir().join("example2_case1_free.json");
    let spec = format!("1={}", matrix_file.to_str().unwrap());
    let out = run(&["game", scenario.to_str().unwrap(), "--override", &spec]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("mode: lock"), "{summary}");
}

#[test]
fn sweep_aggregates_modes() {
    let out = run(&["sweep", scenario_dir().to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let total = text.lines().last().unwrap();
    assert!(total.starts_with("total "), "{text}");
    assert!(total.contains("lock 3"), "{text}");
    assert!(total.contains("oscillation 3"), "{text}");
    assert!(total.contains("skipped 1"), "{text}");
    assert!(total.contains("failed 0"), "{text}");
}

#[test]
fn stackelberg_value_ordering() {
    let path = scenario_dir().join("example2_case1_free.json");
    let out = run(&["stackelberg", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("value ordering holds: true"), "{text}");
}
