use std::path::Path;
use std::process::Command as Process;

use diracres_cli::config::{parse_config, RunConfig};
use diracres_cli::pipeline::{run, Command, RunOptions, EXIT_CHECK_FAILED, EXIT_CONFIG};

fn small_config() -> RunConfig {
    parse_config(
        r#"{"potential": {"channel": "ElectricI4", "g": 2.0, "R0": 1.0},
            "grids": {"cells_per_axis": 2, "gauss_order": 2, "polar_order": 8, "azimuthal_count": 16},
            "scatter": {"energies": [-2.0, -1.5, 1.5, 2.0]},
            "search": {"region": [-3.0, -0.2, -1.5, -0.01], "max_depth": 6}}"#,
    )
    .unwrap()
}

fn bytes(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn reruns_are_bitwise_identical() {
    let cfg = small_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        for cmd in [Command::Scatter, Command::Resonances] {
            run(cmd, &cfg, &RunOptions { out: dir.path().to_path_buf(), use_cache: false }).unwrap();
        }
    }
    for name in ["scattering.csv", "resonances.csv", "search_log.json", "run_config.json"] {
        assert_eq!(bytes(a.path(), name), bytes(b.path(), name), "{name} differs");
    }
}

#[test]
fn warm_cache_reproduces_cold_run() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { out: dir.path().to_path_buf(), use_cache: true };
    run(Command::Resonances, &cfg, &opts).unwrap();
    let cold = bytes(dir.path(), "resonances.csv");
    assert!(dir.path().join("det_cache.jsonl").exists());
    run(Command::Resonances, &cfg, &opts).unwrap();
    assert_eq!(cold, bytes(dir.path(), "resonances.csv"));
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_diracres"))
}

#[test]
fn invalid_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"potential": {"channel": "ElectricI4", "g": 2.0, "R0": 1.0}, "grids": {"gauss_order": -1}}"#)
        .unwrap();
    let status = binary()
        .args(["verify", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("RUST_LOG", "off")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_CONFIG));
}

#[test]
fn failed_check_exits_with_check_code() {
    // a coarse sphere leaves the sheet-jump identity far from its tolerance
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coarse.json");
    std::fs::write(
        &path,
        r#"{"potential": {"channel": "ElectricI4", "g": 0.0, "R0": 1.0},
            "grids": {"cells_per_axis": 2, "polar_order": 6, "azimuthal_count": 8}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = binary()
        .args(["verify", "--threads", "2", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .env("RUST_LOG", "off")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_CHECK_FAILED));
    assert!(out.join("verify_report.json").exists());
}
