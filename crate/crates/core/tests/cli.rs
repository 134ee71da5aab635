use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pcopula(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcopula")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = pcopula(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn simulated(dir: &Path) -> PathBuf {
    let path = dir.join("data.csv");
    ok(&["simulate", "--dgp", "H3", "--d", "3", "--n", "200", "--seed", "12", "-o", path.to_str().unwrap()]);
    path
}

#[test]
fn test_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(dir.path());
    let args = [
        "test", "--input", input.to_str().unwrap(), "--x", "x", "--y", "y", "--z", "z1,z2,z3",
        "--method", "pc", "--q", "1", "--alpha", "0.05", "--seed", "7",
    ];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    let r = &v["results"][0];
    assert_eq!(r["method"], "pc");
    assert_eq!(r["df"], 1);
    assert_eq!(r["seed"], 7);
    // defaults are resolved into the embedded config
    assert_eq!(v["config"]["pc"]["cdf"]["m"], 15);
    assert_eq!(v["config"]["pc"]["cdf"]["tau_min"], 0.01);
}

#[test]
fn several_q_values_are_reported_separately() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(dir.path());
    let v: Value = serde_json::from_slice(&ok(&[
        "test", "--input", input.to_str().unwrap(), "--method", "pc,gcm,npn", "--q", "1,3",
    ]))
    .unwrap();
    assert_eq!(v["multiplicity"], "no multiplicity correction applied");
    let methods: Vec<(String, u64)> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["method"].as_str().unwrap().to_string(), r["q"].as_u64().unwrap()))
        .collect();
    let expect = [("pc", 1), ("pc", 3), ("gcm", 0), ("npn", 0)];
    assert_eq!(methods, expect.map(|(m, q)| (m.to_string(), q)));
}

#[test]
fn q_zero_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(dir.path());
    let out = pcopula(&["test", "--input", input.to_str().unwrap(), "--method", "pc", "--q", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q"));
    assert!(out.stdout.is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(pcopula(&["test", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(pcopula(&["test", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(pcopula(&["frobnicate"]).status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y,z\n1,2,3\nNaN,1,1\n4,5,6\n").unwrap();
    let out = pcopula(&["test", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let input = simulated(dir.path());
    let out = pcopula(&["test", "--input", input.to_str().unwrap(), "--z", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));

    // a rejection is still a successful run
    let out = pcopula(&["test", "--input", input.to_str().unwrap(), "--alpha", "0.99"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_of_another_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(dir.path());
    let sidecar = format!("{}.config.json", input.display());
    let out = pcopula(&["test", "--config", &sidecar]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn benchmark_bookkeeping() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("long.csv");
    let out = ok(&[
        "benchmark", "--dgp", "H2", "--d", "3", "--n", "120", "--replicates", "9",
        "--tests", "pc:q=1,gcm", "--seed", "11", "--csv", csv.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_slice(&out).unwrap();
    let report = &v["report"];
    assert_eq!(report["replicates"], 9);
    assert_eq!(report["master_seed"], 11);
    for t in report["tests"].as_array().unwrap() {
        let p = t["p_values"].as_array().unwrap();
        assert_eq!(p.len(), 9);
        let ok_count = p.iter().filter(|v| !v.is_null()).count();
        assert_eq!(ok_count + t["failures"].as_u64().unwrap() as usize, 9);
        for v in p.iter().filter_map(Value::as_f64) {
            assert!((0.0..=1.0).contains(&v));
        }
        let ks = t["ks"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&ks));
    }
    let table = std::fs::read_to_string(&csv).unwrap();
    // header plus one line per replicate and test
    assert_eq!(table.lines().count(), 1 + 2 * 9);
}
