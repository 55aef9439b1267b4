use std::path::Path;
use std::process::{Command, Output};

use mimo_scaling::harness::ResultTable;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimo-scaling"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn binary")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_out_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["loss-curve", "--trials", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--out"));
    let o = run(&["verify", "--only", "8"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_flag_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["loss-curve", "--frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn loss_curve_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["loss-curve", "--gamma-db", "0:10:30", "--trials", "500", "--seed", "7", "--out"];
    let a = run(&[&args[..], &["a.csv"]].concat(), dir.path());
    let b = run(&[&args[..], &["b.csv"]].concat(), dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(b.status.success());
    let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(text, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gamma_db,mi_ref_bits,mr_ref_bits,mi_proj_bits,mr_proj_bits,loss_total_bits,stderr_bits"
    );
    assert_eq!(lines.count(), 4);
    assert!(text.ends_with('\n'));
    let meta = std::fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap();
    assert!(meta.contains("\"master_seed\": 7"));
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transforms", "--out", "t.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("t.json")).unwrap();
    let table = ResultTable::from_json(&text).unwrap();
    assert_eq!(table.rows.len(), 9);
    assert_eq!(table.to_json().unwrap(), text);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "schema_version": 1,
        "experiment": "deviation-sweep",
        "parameters": {"n": [16], "beta": [0.5], "gamma_db": [60], "trials": 20, "ensemble": "haar_unitary"},
        "output": {"path": "dev.csv", "format": "csv"}
    }"#;
    std::fs::write(dir.path().join("c.json"), config).unwrap();
    let o = run(&["deviation-sweep", "--config", "c.json", "--trials", "10"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = std::fs::read_to_string(dir.path().join("dev.csv.meta.json")).unwrap();
    assert!(meta.contains("\"trials\": 10"));
    let o = run(&["loss-curve", "--config", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_parameters_are_all_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["loss-convergence", "--beta", "0.2", "--trials", "1", "--gamma-db", "5,1", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for field in ["beta", "trials", "gamma_db"] {
        assert!(err.contains(field), "{field} missing from {err}");
    }
}

#[test]
fn verify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--only", "6,8", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let ids: Vec<u64> = report["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![6, 8]);
    for c in report["criteria"].as_array().unwrap() {
        assert!(c["measured"].is_number() && c["tolerance"].is_number());
        assert_eq!(c["passed"], true);
    }
}

#[test]
fn zero_variance_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["loss-curve", "--variance", "0", "--trials", "5", "--out", "z.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = ResultTable::from_json(&std::fs::read_to_string(dir.path().join("z.json")).unwrap()).unwrap();
    for row in &t.rows {
        assert!(row[1..].iter().all(|&x| x == 0.0));
    }
}
