//! End-to-end tests of the binary: exit-code contract, file formats and
//! determinism.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

const VERSION_LINE: &str = "# branchpoint-lab v1";
const TRACE_HEADER: &str = "step,lambda,omega,reE1,imE1,reE2,imE2,rev1a,imv1a,rev1b,imv1b,rev2a,imv2a,rev2b,imv2b,selfOrth1,selfOrth2";
const SWEEP_HEADER: &str = "lambda,omega,reF,imF,reEplus,imEplus,reEminus,imEminus,regime";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_branchpoint-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, contents: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn classify_default_model() {
    let out = run(&["classify"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_str(&out);
    assert!(text.contains("lambda_cr = 0"));
    assert!(text.contains("critical_omega = 0.25"));
    assert!(text.contains("EP1 = (0, 0.25)"));
    assert!(text.contains("EP2 = (0, -0.25)"));
}

#[test]
fn classify_json_with_regimes() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "omegas": [0.5, 0.25, 0.1] }"#);
    let out = run(&["classify", "--config", &cfg, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["critical_omega"], 0.25);
    assert_eq!(v["exceptional_points"][0]["omega"], 0.25);
    let regimes: Vec<&str> = v["regimes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["regime"].as_str().unwrap())
        .collect();
    assert_eq!(regimes, ["overcritical", "critical", "subcritical"]);
}

#[test]
fn classify_reports_diabolic_point() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "model": { "a1": 0, "b1": 1, "a2": 0, "b2": -1, "gamma1": 0.5, "gamma2": 0.5 } }"#,
    );
    let out = run(&["classify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_str(&out).contains("diabolic point at (0, 0)"));
}

#[test]
fn classify_parallel_levels_is_precondition_failure() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "model": { "a1": 0, "b1": 1, "a2": 1, "b2": 1, "gamma1": 1, "gamma2": 0 } }"#,
    );
    let out = run(&["classify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_config_key_is_config_failure() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "modle": {} }"#);
    let out = run(&["classify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_config_failure() {
    let out = run(&["classify", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_model_is_config_failure() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "model": { "a1": 0, "b1": 1, "a2": 0, "b2": -1, "gamma1": -1, "gamma2": 0 } }"#,
    );
    let out = run(&["classify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn find_ep_converges_from_default_seed() {
    let out = run(&["find-ep", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!((v["numeric"]["lambda"].as_f64().unwrap()).abs() < 1e-10);
    assert!((v["numeric"]["omega"].as_f64().unwrap() - 0.25).abs() < 1e-10);
    assert!(v["abs_f_at_numeric"].as_f64().unwrap() < 1e-10);
    assert!(v["distance"].as_f64().unwrap() < 1e-10);
}

#[test]
fn find_ep_equal_widths_is_precondition_failure() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "model": { "a1": 0, "b1": 1, "a2": 0, "b2": -1, "gamma1": 0.5, "gamma2": 0.5 } }"#,
    );
    let out = run(&["find-ep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn trace_segment_writes_versioned_csv() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "segment": { "lambda_min": -1.0, "lambda_max": 1.0, "omega": 0.5, "steps": 50 } }"#,
    );
    let outdir = dir.path().join("out");
    let out = run(&["trace", "--config", &cfg, "--out", outdir.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = std::fs::read_to_string(outdir.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(VERSION_LINE));
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    assert_eq!(lines.count(), 51);
}

#[test]
fn trace_is_deterministic() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "loop": { "center_lambda": 0.0, "center_omega": 0.25, "radius_lambda": 0.1, "radius_omega": 0.1, "steps": 64 } }"#,
    );
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let outdir = dir.path().join(name);
        let out = run(&["trace", "--config", &cfg, "--out", outdir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(outdir.join("trace.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "reruns must be byte-identical");
}

#[test]
fn trace_through_ep_exits_5() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "segment": { "lambda_min": -0.2, "lambda_max": 0.2, "omega": 0.25, "steps": 40 } }"#,
    );
    let out = run(&[
        "trace",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn trace_rejects_segment_and_loop_together() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "segment": { "lambda_min": -1.0, "lambda_max": 1.0, "omega": 0.5 },
            "loop": { "center_lambda": 0.0, "center_omega": 0.25, "radius_lambda": 0.1, "radius_omega": 0.1 }
        }"#,
    );
    let out = run(&["trace", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_without_path_block_is_config_failure() {
    let out = run(&["trace"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn monodromy_loop_reports_swap() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "loop": { "center_lambda": 0.0, "center_omega": 0.25, "radius_lambda": 0.1, "radius_omega": 0.1, "steps": 400 } }"#,
    );
    let outdir = dir.path().join("out");
    let out = run(&[
        "monodromy",
        "--config",
        &cfg,
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["permutation"], "swap");
    // Computed c-transport holonomy: M12 = 1, M21 = -1.
    assert!((v["matrix"][0][1]["re"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((v["matrix"][1][0]["re"].as_f64().unwrap() + 1.0).abs() < 1e-6);
    // Same document lands in the output directory.
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("monodromy.json")).unwrap())
            .unwrap();
    assert_eq!(file, v);
}

#[test]
fn monodromy_preset_dp_passes() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "model": { "a1": 0, "b1": 1, "a2": 0, "b2": -1, "gamma1": 0.5, "gamma2": 0.5 } }"#,
    );
    let out = run(&[
        "monodromy",
        "--config",
        &cfg,
        "--preset",
        "DpOnce",
        "--steps",
        "400",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["verdict"]["passed"], true);
}

#[test]
fn monodromy_preset_ep_once_fails_verdict() {
    // The computed holonomy has real off-diagonal entries and det +1; the
    // preset's expected -i/+i pattern (det -1) therefore fails its verdict,
    // which is reported via exit code 1 with the full record on stdout.
    let out = run(&["monodromy", "--preset", "EpOnce", "--steps", "400"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["verdict"]["passed"], false);
    assert_eq!(v["monodromy"]["permutation"], "swap");
}

#[test]
fn monodromy_preset_reversed_passes() {
    let out = run(&["monodromy", "--preset", "ep-reversed", "--steps", "400"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn monodromy_preset_on_wrong_model_is_precondition_failure() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "model": { "a1": 0, "b1": 1, "a2": 0, "b2": -1, "gamma1": 0.5, "gamma2": 0.5 } }"#,
    );
    let out = run(&["monodromy", "--config", &cfg, "--preset", "EpOnce"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn monodromy_unknown_preset_is_config_failure() {
    let out = run(&["monodromy", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_grid_layout() {
    let dir = tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "sweep": { "lambda_min": -1.0, "lambda_max": 1.0, "omega_min": 0.0, "omega_max": 0.5, "n_lambda": 5, "n_omega": 3 } }"#,
    );
    let outdir = dir.path().join("out");
    let out = run(&["sweep", "--config", &cfg, "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let csv = std::fs::read_to_string(outdir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], VERSION_LINE);
    assert_eq!(lines[1], SWEEP_HEADER);
    assert_eq!(lines.len(), 2 + 5 * 3);
    // Row-major with omega fastest: first rows share lambda_min.
    assert!(lines[2].starts_with("-1,0,"));
    assert!(lines[3].starts_with("-1,0.25,"));
    assert!(lines[4].starts_with("-1,0.5,"));
    assert!(lines[5].starts_with("-0.5,0,"));
    // Regime tags appear.
    assert!(csv.contains(",over"));
    assert!(csv.contains(",sub"));
}

#[test]
fn sweep_without_block_is_config_failure() {
    let out = run(&["sweep"]);
    assert_eq!(out.status.code(), Some(2));
}
