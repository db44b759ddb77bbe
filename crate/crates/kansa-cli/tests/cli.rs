//! End-to-end tests of the binary: exit codes, output files, overrides,
//! and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::Output;

fn kansa(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_kansa"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const SOLVE: &str = r#"{
  "command": "solve",
  "domain": {"shape": "unit_square"},
  "density": {"kind": "uniform", "bound": 1.0},
  "kernel": {"kind": "mq", "epsilon": 1.0},
  "n": 0,
  "m": 1,
  "master_seed": 7,
  "rhs": {"constant": {"f": 0.0, "g": 5.0}}
}"#;

const MC: &str = r#"{
  "command": "mc-unisolvence",
  "domain": {"shape": "box", "min": [0.0, 0.0], "max": [8.0, 8.0]},
  "density": {"kind": "uniform", "bound": 1.0},
  "kernel": {"kind": "mq", "epsilon": 1.0},
  "n": 8,
  "m": 4,
  "trials": 10,
  "master_seed": 42
}"#;

const PROBE: &str = r#"{
  "command": "complex-probe",
  "interior": [[0.3, 0.4], [1.0, 1.0]],
  "boundary": [[2.0, 0.0]],
  "kernel": {"kind": "mq", "epsilon": 1.0},
  "direction": [0.6, 0.8]
}"#;

#[test]
fn validate_accepts_a_runnable_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solve.json", SOLVE);
    let out = kansa(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("runnable"));
}

#[test]
fn validate_rejects_zero_epsilon_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solve.json", SOLVE);
    let out = kansa(&[
        "validate",
        cfg.to_str().unwrap(),
        "--set",
        "kernel.epsilon=0",
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stdout(&out).contains("shape parameter must be positive"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn validate_rejects_empty_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solve.json", SOLVE);
    let out = kansa(&["validate", cfg.to_str().unwrap(), "--set", "m=0"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("m must be >= 1"), "{}", stdout(&out));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solve.json", SOLVE);
    let out = kansa(&["validate", cfg.to_str().unwrap(), "--set", "typo_key=3"]);
    assert_eq!(code(&out), 2);
    assert!(
        stdout(&out).contains("unknown field `typo_key`"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\"command\": \"solve\",");
    let out = kansa(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
}

#[test]
fn missing_config_exits_4() {
    let out = kansa(&["solve", "/definitely/not/here.json"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solve.json", SOLVE);
    let blocker = write_config(dir.path(), "blocker", "");
    let out = kansa(&[
        "solve",
        cfg.to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn command_mismatch_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solve.json", SOLVE);
    let out = kansa(&["mc-unisolvence", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("declares command"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn one_by_one_solve_writes_the_boundary_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solve.json", SOLVE);
    let out_dir = dir.path().join("out");
    let out = kansa(&[
        "solve",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let coefficients = std::fs::read_to_string(out_dir.join("coefficients.csv")).unwrap();
    assert_eq!(coefficients, "5.0000000000000000e0\n");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["report"]["singular_verdict"], false);
    assert_eq!(report["config"]["m"], 1);
}

#[test]
fn mc_run_emits_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mc.json", MC);
    let out_dir = dir.path().join("out");
    let out = kansa(&[
        "mc-unisolvence",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trials = std::fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    let lines: Vec<&str> = trials.lines().collect();
    assert_eq!(lines.len(), 11, "header plus ten rows");
    assert!(lines[0].starts_with("trial_id,n,m,kind,epsilon"));
    let counterexamples = std::fs::read_to_string(out_dir.join("counterexamples.json")).unwrap();
    assert_eq!(counterexamples.trim(), "[]");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mc.json", MC);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = kansa(&[
            "mc-unisolvence",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["trials.csv", "summary.json", "counterexamples.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name} differs between reruns"
        );
    }
}

#[test]
fn seed_flag_changes_outputs_and_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mc.json", MC);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    kansa(&[
        "mc-unisolvence",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    kansa(&[
        "mc-unisolvence",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "777",
    ]);
    assert_ne!(
        std::fs::read(a.join("trials.csv")).unwrap(),
        std::fs::read(b.join("trials.csv")).unwrap()
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["master_seed"], 777);
}

#[test]
fn probe_reports_the_unit_pole_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "probe.json", PROBE);
    let out_dir = dir.path().join("out");
    let out = kansa(&[
        "complex-probe",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let probe: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("probe.json")).unwrap())
            .unwrap();
    let limit = probe["limit_estimate"].as_f64().unwrap();
    assert!((limit - 1.0).abs() < 1e-3, "limit {limit}");
    assert_eq!(probe["pass"], true);
}

#[test]
fn assemble_dump_writes_matrix_and_rhs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dump.json",
        &SOLVE.replace("\"command\": \"solve\"", "\"command\": \"assemble-dump\""),
    );
    let out_dir = dir.path().join("out");
    let out = kansa(&[
        "assemble-dump",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--set",
        "m=2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let matrix = std::fs::read_to_string(out_dir.join("matrix.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 2);
    assert_eq!(matrix.lines().next().unwrap().split(',').count(), 2);
    let rhs = std::fs::read_to_string(out_dir.join("rhs.csv")).unwrap();
    assert_eq!(rhs, "5.0000000000000000e0\n5.0000000000000000e0\n");
}

#[test]
fn induction_chain_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "induction.json",
        r#"{
  "command": "induction-chain",
  "domain": {"shape": "box", "min": [0.0, 0.0], "max": [8.0, 8.0]},
  "density": {"kind": "uniform", "bound": 1.0},
  "kernel": {"kind": "imq", "epsilon": 1.0},
  "m": 6,
  "n_max": 6,
  "master_seed": 3
}"#,
    );
    let out_dir = dir.path().join("out");
    let out = kansa(&[
        "induction-chain",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("induction.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8, "header, base case, six steps");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["singular_steps"], 0);
    assert_eq!(summary["max_det_gap"], 0.0);
}

#[test]
fn cofactor_suite_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cofactor.json",
        r#"{
  "command": "cofactor-check",
  "domain": {"shape": "box", "min": [0.0, 0.0], "max": [4.0, 4.0]},
  "density": {"kind": "uniform", "bound": 1.0},
  "kernel": {"kind": "mq", "epsilon": 1.0},
  "trials": 10,
  "master_seed": 5
}"#,
    );
    let out_dir = dir.path().join("out");
    let out = kansa(&[
        "cofactor-check",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("cofactor.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["all_pass"], true);
}

#[test]
fn convergence_study_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "convergence.json",
        r#"{
  "command": "convergence",
  "domain": {"shape": "unit_square"},
  "density": {"kind": "uniform", "bound": 1.0},
  "kernel": {"kind": "mq", "epsilon": 1.0},
  "case": "quadratic",
  "schedule": [[5, 8], [20, 16], [60, 24]],
  "master_seed": 11,
  "eval_grid": 10
}"#,
    );
    let out_dir = dir.path().join("out");
    let out = kansa(&[
        "convergence",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["endpoint_improved"], true);
}

#[test]
fn singular_suite_exits_3_and_archives_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mc.json", MC);
    let out_dir = dir.path().join("out");
    // Flat-limit shape parameter on a unit square: conditioning blows past
    // the verdict threshold.
    let out = kansa(&[
        "mc-unisolvence",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--set",
        r#"domain={"shape":"unit_square"}"#,
        "--set",
        "kernel.epsilon=0.05",
        "--set",
        "n=48",
        "--set",
        "m=24",
        "--set",
        "trials=2",
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let counterexamples: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("counterexamples.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(counterexamples.as_array().unwrap().len(), 2);
    assert_eq!(counterexamples[0]["interior"].as_array().unwrap().len(), 48);
}
