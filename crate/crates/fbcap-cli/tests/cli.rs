//! Command-line behavior: exit codes, output shapes, and schema strictness.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbcap"))
}

fn write_spec(dir: &tempfile::TempDir, name: &str, json: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path
}

const WHITE: &str = r#"{"f": [], "g": [], "noise_variance": 1.0, "power": 3.0}"#;
const MA1: &str = r#"{"f": [], "g": [-0.5], "noise_variance": 1.0, "power": 0.5555555555555556}"#;

#[test]
fn validate_accepts_good_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(
        &dir,
        "ok.json",
        r#"{"f": [0.5], "g": [], "noise_variance": 1, "power": 1}"#,
    );
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "ok");
}

#[test]
fn validate_names_bad_ma_root() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(
        &dir,
        "bad.json",
        r#"{"f": [], "g": [1.5], "noise_variance": 1, "power": 1}"#,
    );
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("MA root -1.5"), "stderr: {stderr}");
}

#[test]
fn validate_rejects_malformed_and_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let garbled = write_spec(&dir, "garbled.json", "{not json");
    let out = bin().arg("validate").arg(&garbled).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let unknown = write_spec(
        &dir,
        "unknown.json",
        r#"{"f": [], "g": [], "noise_variance": 1, "power": 1, "extra": true}"#,
    );
    let out = bin().arg("validate").arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .arg("validate")
        .arg(dir.path().join("missing.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let nonpositive = write_spec(
        &dir,
        "power.json",
        r#"{"f": [], "g": [], "noise_variance": 1, "power": 0}"#,
    );
    let out = bin().arg("validate").arg(&nonpositive).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_text_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "white.json", WHITE);
    let out = bin().arg("capacity").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("a_bar          2"));
    assert!(stdout.contains("capacity_bits  1"));
    assert!(stdout.contains("variant        plain"));
    assert!(stdout.contains("loop_verdict   stable"));
    assert!(stdout.contains("achieved_power 3"));
}

#[test]
fn capacity_json_schema_is_closed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "ma1.json", MA1);
    let out = bin()
        .args(["capacity", "--json"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let obj = value.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        vec![
            "a_bar",
            "achieved_power",
            "all_real_roots",
            "capacity_bits",
            "loop_verdict",
            "residual",
            "variant"
        ]
    );
    assert!((value["a_bar"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert_eq!(value["variant"], "plain");
}

#[test]
fn capacity_flags_unstable_loop() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(
        &dir,
        "ar1.json",
        r#"{"f": [0.5], "g": [], "noise_variance": 1.0, "power": 5.333333333333333}"#,
    );
    let out = bin()
        .args(["capacity", "--json"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((value["capacity_bits"].as_f64().unwrap() - 1.5301).abs() < 1e-3);
    assert_eq!(value["variant"], "flipped");
    assert_eq!(value["loop_verdict"], "unstable");
}

#[test]
fn sweep_csv_shape_and_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "ma1.json", MA1);
    let out = bin()
        .args([
            "sweep",
            "--power-min",
            "1",
            "--power-max",
            "15",
            "--points",
            "8",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "power,snr,a_bar,variant,capacity_bits,kim_bits,loop_verdict"
    );
    let mut last_power = 0.0;
    let mut last_bits = f64::NEG_INFINITY;
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        let power: f64 = cols[0].parse().unwrap();
        let bits: f64 = cols[4].parse().unwrap();
        let kim: f64 = cols[5].parse().unwrap();
        assert!(power > last_power);
        assert!(bits >= last_bits - 1e-12);
        assert!((bits - kim).abs() < 1e-8);
        last_power = power;
        last_bits = bits;
        rows += 1;
    }
    assert_eq!(rows, 8);
}

#[test]
fn sweep_kim_column_empty_for_higher_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(
        &dir,
        "ar2.json",
        r#"{"f": [0.5, -0.2], "g": [], "noise_variance": 1.0, "power": 2.0}"#,
    );
    let out = bin()
        .args([
            "sweep",
            "--power-min",
            "1",
            "--power-max",
            "2",
            "--points",
            "2",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    for line in stdout.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[5], "");
    }
}

#[test]
fn sweep_rejects_bad_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "white.json", WHITE);
    let out = bin()
        .args([
            "sweep",
            "--power-min",
            "2",
            "--power-max",
            "1",
            "--points",
            "5",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_whitened_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "white.json", WHITE);
    let out = bin()
        .args([
            "simulate",
            "--mode",
            "whitened",
            "--samples",
            "200000",
            "--seed",
            "9",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["mode"], "whitened");
    // a_bar = 2: innovation variance a^2 sigma^2 = 4.
    let var_e = report["innovation_variance"].as_f64().unwrap();
    assert!((var_e - 4.0).abs() < 0.1, "var_e = {var_e}");
    assert_eq!(report["diverged"], serde_json::Value::Bool(false));
}

#[test]
fn simulate_trace_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "ma1.json", MA1);
    let trace = dir.path().join("trace.csv");
    let out = bin()
        .args([
            "simulate",
            "--mode",
            "colored",
            "--samples",
            "50",
            "--burn-in",
            "10",
            "--seed",
            "1",
            "--out",
        ])
        .arg(&trace)
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,x_tilde,y_prime,e_prime,u,v");
    // burn-in plus samples rows, k counting from 0
    assert_eq!(lines.count(), 60);
}

#[test]
fn verify_white_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "white.json", WHITE);
    let out = bin().arg("verify").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(!stdout.contains("FAIL"));
    assert!(stdout.contains("kim_tightness"));
    assert!(stdout.contains("matches capacity"));
    assert!(stdout.contains("equivalence_consistent=true"));
}

#[test]
fn verify_ma1_stable_and_tight() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "ma1.json", MA1);
    let out = bin().arg("verify").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(!stdout.contains("FAIL"));
    assert!(stdout.contains("stable; equivalence_consistent=true"));
}
