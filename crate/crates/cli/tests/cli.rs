// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn dqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqs")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(command: &str, config: &Path, out: &Path) {
    let o = dqs(&[
        command,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

/// Header comments and data rows of a CSV file.
fn read_csv(path: &Path) -> (Vec<String>, Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let (meta, rest): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
    let header = rest[0].split(',').map(str::to_string).collect();
    let rows = rest[1..]
        .iter()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (meta.into_iter().map(str::to_string).collect(), header, rows)
}

fn meta_value(meta: &[String], key: &str) -> String {
    let prefix = format!("# {key}: ");
    meta.iter()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in {meta:?}"))
        .to_string()
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn closed_system_keeps_mean_n() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"system": {"omega0": 1.0, "n_max": 6},
            "rates": {"gamma": 0.0, "gamma_prime": 0.0},
            "evolve": {"t_final": 5.0, "dt": 0.01, "sample_every": 25,
                       "initial_state": {"type": "coherent", "alpha": [0.8, 0.3]}},
            "output": {"format": "csv"}}"#,
    );
    run_ok("evolve", &cfg, dir.path());
    let (_, header, rows) = read_csv(&dir.path().join("evolve.csv"));
    assert_eq!(
        header,
        ["time", "mean_n", "trace", "purity", "min_eig", "re_coh01", "im_coh01"]
    );
    assert_eq!(rows.len(), 21);
    let n0 = rows[0][1];
    for r in &rows {
        assert!((r[1] - n0).abs() < 1e-12, "{} vs {n0}", r[1]);
        assert!((r[3] - 1.0).abs() < 1e-8, "purity {}", r[3]);
    }
    assert!(!dir.path().join("evolve.json").exists());
}

#[test]
fn steady_state_at_unit_thermal_ratio() {
    let dir = TempDir::new().unwrap();
    run_ok("steady", &configs_dir().join("steady_thermal.json"), dir.path());
    let (meta, header, rows) = read_csv(&dir.path().join("steady.csv"));
    assert_eq!(header, ["n", "population", "detailed_balance"]);
    let mean: f64 = rows.iter().map(|r| r[0] * r[1]).sum();
    let reported: f64 = meta_value(&meta, "mean_n").parse().unwrap();
    // 1/(e − 1)
    assert!((mean - 0.581976706869326).abs() < 1e-9, "{mean}");
    assert!((reported - mean).abs() < 1e-12);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("steady.json")).unwrap()).unwrap();
    assert!(json["summary"]["relative_error_vs_bose_einstein"].as_f64().unwrap() < 1e-9);
}

#[test]
fn malformed_json_exits_two_with_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        "{\n  \"system\": {\"omega0\": 1.0,\n  \"n_max\" 4}\n}\n",
    );
    let o = dqs(&[
        "steady",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn schema_violation_names_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"system": {"omega0": 1.0, "n_max": 4}, "rates": {"gamma": 1.0},
            "evolve": {"t_final": 1.0, "dt": 0.01, "initial_state": {"type": "fock", "level": 1}}}"#,
    );
    let o = dqs(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("evolve.initial_state"), "{err}");
    assert!(err.contains("level"), "{err}");
}

#[test]
fn missing_config_exits_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let o = dqs(&["rates", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn precondition_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "stiff.json",
        r#"{"system": {"omega0": 1.0, "n_max": 30}, "rates": {"gamma": 1.0, "n_bar": 1.0},
            "evolve": {"t_final": 1.0, "dt": 0.1, "initial_state": {"type": "fock", "n": 0}}}"#,
    );
    let o = dqs(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for (command, file) in [
        ("evolve", "evolve_thermalization.json"),
        ("correlation", "correlation_three_modes.json"),
        ("tfd-check", "tfd_check.json"),
        ("validate-joint", "validate_joint.json"),
    ] {
        let cfg = configs_dir().join(file);
        run_ok(command, &cfg, a.path());
        run_ok(command, &cfg, b.path());
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let p = entry.unwrap().path();
        let other = b.path().join(p.file_name().unwrap());
        assert_eq!(
            std::fs::read(&p).unwrap(),
            std::fs::read(&other).unwrap(),
            "{}",
            p.display()
        );
        compared += 1;
    }
    assert_eq!(compared, 8);
}

#[test]
fn metadata_carries_hash_and_version() {
    let dir = TempDir::new().unwrap();
    let cfg = configs_dir().join("rates_flat_band.json");
    run_ok("rates", &cfg, dir.path());
    let (meta, header, rows) = read_csv(&dir.path().join("rates.csv"));
    assert_eq!(meta[0], format!("# dqs {}", dqs_core::VERSION));
    let digest = hex::encode(Sha256::digest(std::fs::read(&cfg).unwrap()));
    assert_eq!(meta_value(&meta, "config_sha256"), digest);
    assert_eq!(header[0], "gamma");
    assert_eq!(rows.len(), 1);
    let ratio = rows[0][5];
    let n0 = rows[0][4];
    assert!((ratio / n0 - 1.0).abs() < 1e-3);
}

#[test]
fn seed_drives_tfd_check() {
    let dir = TempDir::new().unwrap();
    let cfg = configs_dir().join("tfd_check.json");
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = dqs(&[
            "tfd-check",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(o.status.success());
        std::fs::read_to_string(out.join("tfd-check.csv")).unwrap()
    };
    let first = run("5", "a");
    assert_eq!(first, run("5", "b"));
    assert_ne!(first, run("6", "c"));
    let (meta, _, rows) = read_csv(&dir.path().join("a/tfd-check.csv"));
    assert_eq!(meta_value(&meta, "seed"), "5");
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r[4] < 1e-12));
}

#[test]
fn foreign_block_is_config_error() {
    let cfg = configs_dir().join("steady_thermal.json");
    let o = dqs(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("steady"));
}

#[test]
fn shipped_configs_run() {
    let dir = TempDir::new().unwrap();
    let mut count = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_string_lossy().to_string();
        let command = match stem.as_str() {
            "tfd_check" => "tfd-check",
            "validate_joint" => "validate-joint",
            s => s.split('_').next().unwrap(),
        };
        let command = command.to_string();
        run_ok(&command, &path, dir.path());
        count += 1;
    }
    assert!(count >= 9);
}

#[test]
fn validate_joint_reports_fit() {
    let dir = TempDir::new().unwrap();
    run_ok("validate-joint", &configs_dir().join("validate_joint.json"), dir.path());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate-joint.json")).unwrap()).unwrap();
    let s = &json["summary"];
    assert!(s["gamma_fit_relative_error"].as_f64().unwrap().abs() < 0.15);
    assert!(s["max_trace_distance_in_window"].as_f64().unwrap() < 0.05);
    assert_eq!(s["joint_dim"].as_u64(), Some(17));
    let (_, header, rows) = read_csv(&dir.path().join("validate-joint.csv"));
    assert_eq!(header[1], "trace_distance");
    assert_eq!(rows.len(), 1201);
    for r in &rows {
        assert!((r[4] - 1.0).abs() < 1e-10, "joint purity {}", r[4]);
        assert!((r[5] - 1.0).abs() < 1e-10, "total excitation {}", r[5]);
    }
}
