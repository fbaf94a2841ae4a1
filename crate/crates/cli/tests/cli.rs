//! Binary-level contract tests: flag handling, config precedence, exit
//! codes, output formats, and the byte-level reproducibility guarantee
//! across worker counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metasir"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("metasir-test-{}-{name}", std::process::id()));
    p
}

/// Criterion 10: a fixed manifest produces byte-identical output at worker
/// counts 1, 4, and 8 — for an estimator on each sampling pipeline.
#[test]
fn criterion_10_reproducibility_across_worker_counts() {
    let cases: Vec<Vec<&str>> = vec![
        // materialized sampling path
        vec![
            "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--method",
            "mc", "--samples", "2000", "--seed", "42", "--tol", "1e-3", "--x-grid",
            "0.1:0.9:9:linear",
        ],
        // streaming radial path (ultrareliable target)
        vec![
            "tdist", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--eps", "0.001",
            "--method", "mc", "--samples", "300", "--seed", "7", "--t-grid",
            "1e-5:1e-3:7:log",
        ],
        // streaming interference path
        vec![
            "interference", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--samples", "400",
            "--seed", "11", "--tol", "1e-5", "--x-grid", "5:500:9:log",
        ],
        // throughput estimator (paired rate-control + deterministic)
        vec![
            "throughput", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--eps", "0.01",
            "--samples", "1000", "--seed", "3", "--tol", "1e-3", "--theta-grid",
            "0.1:10:5:log",
        ],
    ];
    for case in &cases {
        let mut outputs = Vec::new();
        for workers in ["1", "4", "8"] {
            let mut args = case.clone();
            args.extend(["--workers", workers]);
            let out = run(&args);
            assert!(
                out.status.success(),
                "{case:?} with {workers} workers failed: {}",
                stderr(&out)
            );
            outputs.push(out.stdout);
        }
        assert_eq!(outputs[0], outputs[1], "1 vs 4 workers differ for {case:?}");
        assert_eq!(outputs[1], outputs[2], "4 vs 8 workers differ for {case:?}");
    }
}

#[test]
fn rerunning_a_manifest_is_byte_identical() {
    let args = [
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--method",
        "gilpelaez", "--x-grid", "0.05:0.95:19:linear",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    // and through a file
    let path = tmp_path("rerun.csv");
    let path_str = path.to_str().unwrap();
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", path_str]);
    assert!(run(&with_out).status.success());
    let first = std::fs::read(&path).unwrap();
    assert!(run(&with_out).status.success());
    let second = std::fs::read(&path).unwrap();
    assert_eq!(first, second);
    let _ = std::fs::remove_file(&path);
}

#[test]
fn invalid_alpha_exits_one_with_message() {
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "2", "--R", "0.5", "--theta", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("path_loss_exponent must exceed 2"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn config_file_minimal_plus_defaults() {
    let path = tmp_path("minimal.json");
    std::fs::write(&path, r#"{"network": {"lambda": 1.0, "alpha": 4.0, "R": 0.5}}"#).unwrap();
    let out = run(&[
        "md", "--config", path.to_str().unwrap(), "--theta", "1", "--x-grid",
        "0.2:0.8:4:linear",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("# lambda=1.0000000000000000e0"));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn unknown_config_key_is_named() {
    let path = tmp_path("badkey.json");
    std::fs::write(
        &path,
        r#"{"network": {"lambda": 1.0, "alpha_db": 6.0, "R": 0.5}}"#,
    )
    .unwrap();
    let out = run(&["md", "--config", path.to_str().unwrap(), "--theta", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("alpha_db"),
        "error must name the offending key: {}",
        stderr(&out)
    );
    let _ = std::fs::remove_file(&path);
}

#[test]
fn flag_overrides_config_file_seed() {
    let path = tmp_path("seed.json");
    std::fs::write(
        &path,
        r#"{"network": {"lambda": 1.0, "alpha": 4.0, "R": 0.5}, "mc": {"samples": 50, "seed": 42}}"#,
    )
    .unwrap();
    let out = run(&[
        "md", "--config", path.to_str().unwrap(), "--theta", "1", "--method", "mc", "--seed",
        "7", "--tol", "1e-2", "--x-grid", "0.3:0.7:3:linear",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("# seed=7"), "{}", stdout(&out));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn theta_db_converts_to_linear() {
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta-db", "0", "--x-grid",
        "0.3:0.7:3:linear",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# theta=1.0000000000000000e0"));
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta-db", "10", "--x-grid",
        "0.3:0.7:3:linear",
    ]);
    assert!(stdout(&out).contains("# theta=1.0000000000000000e1"));
}

#[test]
fn fig2_requires_explicit_reliability_target() {
    let out = run(&["fig2", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--nu"), "{}", stderr(&out));
}

#[test]
fn conflicting_target_flags_exit_one() {
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--nu", "0.9",
        "--eps", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_grid_spec_exits_one() {
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--x-grid",
        "0:1:banana:linear",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--x-grid",
        "0:0.9:5:log",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("log grids require positive endpoints"));
}

#[test]
fn method_mismatch_exits_one() {
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--method",
        "ultrarel",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unsupported_exponent_for_quasi_closed_form() {
    let out = run(&[
        "tdist", "--lambda", "1", "--alpha", "3", "--R", "0.5", "--nu", "0.9", "--method",
        "ultrarel", "--t-grid", "0.01:1:3:log",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("alpha = 4"), "{}", stderr(&out));
}

#[test]
fn empty_table_is_header_only_csv() {
    // a window this sparse holds no links at all (deterministic seed)
    let out = run(&[
        "realization", "--lambda", "1e-6", "--alpha", "4", "--R", "0.5", "--theta", "1",
        "--nu", "0.9", "--window", "1x1", "--seed", "5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = stdout(&out);
    let lines: Vec<&str> = body.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines, vec!["tx_x,tx_y,rx_x,rx_y,reliability,threshold"]);
}

#[test]
fn json_output_is_well_formed() {
    let out = run(&[
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--format",
        "json", "--x-grid", "0.3:0.7:3:linear",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["manifest"]["command"], "md");
    assert_eq!(doc["columns"].as_array().unwrap().len(), 2);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn workers_env_var_is_fallback() {
    let out = bin()
        .args([
            "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--method",
            "mc", "--samples", "100", "--seed", "1", "--tol", "1e-2", "--x-grid",
            "0.3:0.7:3:linear",
        ])
        .env("METASIR_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("manifest: workers=2"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn validate_duality_passes_and_unknown_suite_fails() {
    let out = run(&[
        "validate", "--suite", "duality", "--samples", "500", "--seed", "42", "--lambda", "1",
        "--alpha", "4", "--R", "0.5", "--theta", "1", "--nu", "0.9", "--tol", "1e-3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
    assert!(stdout(&out).contains("duality_violations_theta1_nu0.9,0"));

    let out = run(&["validate", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn manifest_excludes_workers_but_stderr_reports_them() {
    let args = [
        "md", "--lambda", "1", "--alpha", "4", "--R", "0.5", "--theta", "1", "--method", "mc",
        "--samples", "100", "--seed", "1", "--tol", "1e-2", "--x-grid", "0.3:0.7:3:linear",
    ];
    let mut with_workers: Vec<&str> = args.to_vec();
    with_workers.extend(["--workers", "4"]);
    let out = run(&with_workers);
    assert!(!stdout(&out).contains("workers"), "embedded manifest must stay worker-free");
    assert!(stderr(&out).contains("manifest: workers=4"));
}
