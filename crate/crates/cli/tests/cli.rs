use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn floquet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floquet-tfim")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_BOND_CONFIG: &str = r#"{
    "L": 4, "g": 1.0, "model": "bond",
    "bonds": [
        {"kind": "cosine", "amplitude": 0.1, "frequency": 4.0},
        {"kind": "constant", "amplitude": 0.1},
        {"kind": "constant", "amplitude": 0.1}
    ],
    "initial": "uuud", "dt": 0.02, "t_final": 2.0, "record_stride": 5
}"#;

#[test]
fn unknown_scenario_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = floquet(&["scenario", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &SMALL_BOND_CONFIG.replace("\"g\"", "\"gee\""));
    let out = floquet(&["simulate", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn uncaptured_front_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = floquet(&[
        "scenario",
        "unblocked",
        "--override",
        "L=6",
        "--t-final",
        "0.05",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn manifest_hashes_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_BOND_CONFIG);
    let run = dir.path().join("run");
    let out = floquet(&["simulate", "--config", &config, "--out", run.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&run.join("manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    for expected in ["magnetization.csv", "correlation.csv", "parity.csv", "norm.csv", "summary.json"] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    for f in files {
        let bytes = fs::read(run.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    assert_eq!(manifest["config"]["L"], 4);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    let header = fs::read_to_string(run.join("magnetization.csv")).unwrap();
    assert!(header.starts_with("time [1/g],site_or_bond,observable,value\n"));
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_BOND_CONFIG);
    let hashes = |name: &str| {
        let run = dir.path().join(name);
        assert!(floquet(&["simulate", "--config", &config, "--out", run.to_str().unwrap()]).status.success());
        let manifest = read_json(&run.join("manifest.json"));
        manifest["files"].as_array().unwrap().iter().map(|f| f["sha256"].clone()).collect::<Vec<_>>()
    };
    assert_eq!(hashes("a"), hashes("b"));
}

#[test]
fn overrides_and_explicit_flags_reach_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_BOND_CONFIG);
    let run = dir.path().join("run");
    let out = floquet(&[
        "simulate",
        "--config",
        &config,
        "--override",
        "bonds.1.amplitude=0.2",
        "--override",
        "scheme=midpoint",
        "--t-final",
        "1.0",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&run.join("manifest.json"));
    assert_eq!(manifest["config"]["bonds"][1]["amplitude"], 0.2);
    assert_eq!(manifest["config"]["scheme"], "midpoint");
    assert_eq!(manifest["config"]["t_final"], 1.0);
    let summary = read_json(&run.join("summary.json"));
    assert_eq!(summary["samples"], 11);
}

#[test]
fn blocked_scenario_on_a_short_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out = floquet(&[
        "scenario",
        "blocked",
        "--override",
        "L=4",
        "--override",
        "t_final=40",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("summary.json"));
    let floor = summary["min_magnetization_beyond_site_2"].as_f64().unwrap();
    assert!(floor > 0.9 && floor <= 1.0, "floor {floor}");
    assert_eq!(summary["min_magnetization"].as_array().unwrap().len(), 4);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["scenario"], "blocked");
    assert_eq!(manifest["parameters"]["L"], 4.0);
    let csv = fs::read_to_string(dir.path().join("magnetization.csv")).unwrap();
    assert!(csv.starts_with("time [T],"));
}

#[test]
fn control_scenario_traces_both_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let out = floquet(&["control", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let summary = read_json(&dir.path().join("summary.json"));
    let records = summary["control"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    for r in records {
        assert!(r["average"].as_f64().unwrap().abs() < 1e-7);
        assert_eq!(r["F(0)"], 2.0);
    }
    let mut reader = csv::Reader::from_path(dir.path().join("control.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2001);
    let t_last: f64 = rows[2000][1].parse().unwrap();
    assert!((t_last - 2.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn scenario_list_names_every_scenario() {
    let out = floquet(&["scenario", "--list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "blocked",
        "unblocked",
        "switch_sweep",
        "switch_onoff",
        "double_drive",
        "stroboscopic",
        "magnus",
        "local_drive",
        "control_function",
    ] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn magnus_subcommand_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
        "L": 4, "g": 1.0, "model": "bond",
        "bonds": [
            {"kind": "constant", "amplitude": 0.1},
            {"kind": "cosine", "amplitude": 0.1, "frequency": 2.0},
            {"kind": "constant", "amplitude": 0.1}
        ],
        "initial": "uuud", "dt": 0.01, "t_final": 1.0
    }"#,
    );
    let out = floquet(&["magnus", "--config", &config, "--nodes", "2048", "--out", dir.path().join("m").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("m/summary.json"));
    assert!(summary["analytic_order0_max_deviation"].as_f64().unwrap() < 1e-8);
    assert!((summary["period"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);
}
