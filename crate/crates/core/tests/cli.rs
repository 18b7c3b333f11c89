// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fockdecay"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn read_column(path: &Path, col: usize) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[f.len() - 1].parse().unwrap(), f[col].parse().unwrap())
        })
        .collect()
}

#[test]
fn validate_shipped_configs() {
    for name in ["single_decay.json", "fig1_number.json", "fig2_strangeness.json"] {
        let out = bin().arg("validate").arg(config(name)).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn single_decay_run_writes_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run"])
        .arg(config("single_decay.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .args(["--routes", "kraus,heisenberg", "--seed", "7"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("kraus_N.csv");
    let header = std::fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "t,N,route,t_raw");
    for (t, n) in read_column(&csv, 1) {
        assert!((n - (-t).exp()).abs() <= 1e-12);
    }
    assert!(!dir.path().join("ode_N.csv").exists());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed=7\n"));
    assert!(manifest.contains("routes=kraus,heisenberg\n"));
    assert!(manifest.lines().last().unwrap().starts_with("timestamp="));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = dir.path().join("bad.json");
    std::fs::write(&malformed, "{\"schema_version\": 1,").unwrap();
    let out = bin().arg("validate").arg(&malformed).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CONFIG_MALFORMED_JSON"));

    let text = std::fs::read_to_string(config("single_decay.json")).unwrap();
    let negative = dir.path().join("neg.json");
    std::fs::write(&negative, text.replace("\"width\": 1.0", "\"width\": -1.0")).unwrap();
    let out = bin().arg("run").arg(&negative).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CONFIG_WIDTH_NEGATIVE"));

    // An output path that is an existing file cannot be created.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    let out = bin()
        .arg("run")
        .arg(config("single_decay.json"))
        .arg("--out-dir")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["run", "x.json", "--routes", "euler"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(bin().arg("--help").output().unwrap().status.success());
}
