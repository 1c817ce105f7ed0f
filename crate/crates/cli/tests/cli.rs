use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pseudoq(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudoq"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Rebuilds the command line recorded in a manifest.
fn replay_args(manifest: &Value) -> Vec<String> {
    let mut args = vec![manifest["subcommand"].as_str().unwrap().to_string()];
    for (key, value) in manifest["params"].as_object().unwrap() {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => args.push(flag),
            Value::Array(items) if items.is_empty() => {}
            Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(|v| v.as_str().map_or(v.to_string(), str::to_string)).collect();
                args.extend([flag, joined.join(",")]);
            }
            Value::String(s) => args.extend([flag, s.clone()]),
            other => args.extend([flag, other.to_string()]),
        }
    }
    args.extend(["--seed".into(), manifest["seed"].to_string()]);
    args
}

#[test]
fn learn_clifford_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = pseudoq(&["learn-clifford", "--n", "4", "--trials", "100", "--seed", "7"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("success=100/100 queries=(9,8)"));
    let result = read_json(&dir.path().join("learn_clifford.json"));
    assert_eq!(result["successes"], 100);
    for r in result["results"].as_array().unwrap() {
        assert_eq!(r["queries_forward"], 9);
        assert_eq!(r["queries_adjoint"], 8);
        assert_eq!(r["success"], true);
        assert!(r["recovered"]["x_images"].is_array());
    }
}

#[test]
fn gap_scan_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = pseudoq(&["gap-scan", "--n-min", "8", "--n-max", "512"], dir.path());
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("gap_scan.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, ["n", "chain", "gap", "n_times_gap", "tau_eps", "eps"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    for r in &rows {
        let n: f64 = r[0].parse().unwrap();
        let gap: f64 = r[2].parse().unwrap();
        let scaled: f64 = r[3].parse().unwrap();
        assert!((n * gap - scaled).abs() < 1e-12);
    }
}

#[test]
fn replay_from_manifest_is_byte_identical() {
    let runs: [&[&str]; 3] = [
        &["purity-exp", "--samples", "500", "--seed", "11"],
        &["bound-eval", "--family", "overlap", "--samples", "2000", "--seed", "12"],
        &["circuit-converge", "--n", "2", "--mode", "sampled", "--samples", "50", "--max-length", "10", "--seed", "13"],
    ];
    for args in runs {
        let first = tempfile::tempdir().unwrap();
        assert!(pseudoq(args, first.path()).status.success(), "{args:?}");
        let stem = args[0].replace('-', "_");
        let manifest = read_json(&first.path().join(format!("{stem}.manifest.json")));
        let replay: Vec<String> = replay_args(&manifest);
        let second = tempfile::tempdir().unwrap();
        let refs: Vec<&str> = replay.iter().map(String::as_str).collect();
        let o = Command::new(env!("CARGO_BIN_EXE_pseudoq"))
            .args(&refs)
            .arg("--out")
            .arg(second.path())
            .env("PSEUDOQ_THREADS", "2")
            .output()
            .unwrap();
        assert!(o.status.success(), "{replay:?}: {}", String::from_utf8_lossy(&o.stderr));
        let a = std::fs::read(first.path().join(format!("{stem}.csv"))).unwrap();
        let b = std::fs::read(second.path().join(format!("{stem}.csv"))).unwrap();
        assert_eq!(a, b, "{stem} differs on replay");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_flag = pseudoq(&["gap-scan", "--bogus"], dir.path());
    assert_eq!(unknown_flag.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&unknown_flag.stderr).contains("Usage"));
    assert_eq!(pseudoq(&["no-such-command"], dir.path()).status.code(), Some(64));
    assert_eq!(pseudoq(&["gap-scan", "--n-min", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(pseudoq(&["learn-ck", "--n", "3", "--k", "3"], dir.path()).status.code(), Some(2));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_pseudoq"))
        .args(["selftest", "--out"])
        .arg(dir.path())
        .env("PSEUDOQ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(64));
}

#[test]
fn help_documents_every_schema() {
    let dir = tempfile::tempdir().unwrap();
    let expectations = [
        ("gap-scan", "n, chain, gap, n_times_gap, tau_eps, eps"),
        ("mixing-scan", "n, chain, gap, n_times_gap, tau_eps, eps"),
        ("circuit-converge", "n, k, gate_source, length, metric, value, stderr, seed"),
        ("design-check", "n, k, length_or_size, metric, value, stderr"),
        ("tpe-lambda", "N, k, method, lambda_A, lambda_C, p, lambda_Q, bound_rhs, bound_satisfied"),
        ("tpe-quantum", "N, k, method, lambda_A, lambda_C, p, lambda_Q, bound_rhs, bound_satisfied"),
        ("bound-eval", "experiment, params, bound, empirical_freq, samples, seed"),
        ("purity-exp", "experiment, params, bound, empirical_freq, samples, seed"),
        ("thermal-exp", "experiment, params, bound, empirical_freq, samples, seed"),
        ("learn-clifford", "recovered, queries_forward, queries_adjoint, success, distances"),
        ("learn-ck", "recovered, queries_forward, queries_adjoint, success, distances"),
        ("test-clifford", "trial, instance, verdict, correct"),
        ("selftest", "check, passed, value, tolerance"),
    ];
    for (cmd, columns) in expectations {
        let o = pseudoq(&[cmd, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(columns), "{cmd} help lacks its schema");
    }
}

#[test]
fn json_format_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = pseudoq(&["tpe-lambda", "--n-dim", "4,8", "--format", "json"], dir.path());
    assert!(o.status.success());
    let rows = read_json(&dir.path().join("tpe_lambda.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["method"], "restricted");
    assert!(rows[0]["lambda_C"].is_null());
    assert_eq!(rows[1]["bound_satisfied"], true);
}

#[test]
fn testing_far_instances() {
    let dir = tempfile::tempdir().unwrap();
    let o = pseudoq(&["test-clifford", "--instance", "far", "--trials", "20", "--seed", "5"], dir.path());
    assert!(o.status.success());
    let result = read_json(&dir.path().join("test_clifford.json"));
    for r in result["results"].as_array().unwrap() {
        let d = r["distance_d"].as_f64().unwrap();
        assert!(d > 0.3 && d < 1.0 / 3.0);
    }
    assert!(result["correct"].as_u64().unwrap() >= 19);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pseudoq(&["selftest"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    assert!(dir.path().join("selftest.manifest.json").exists());
}
