use std::path::{Path, PathBuf};

use diracres_cli::config::{parse_config, RunConfig};
use diracres_cli::pipeline::{run, Command, RunOptions};
use diracres_cli::records::{read_csv, ResonanceRecord};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn free_config() -> RunConfig {
    parse_config(
        r#"{"potential": {"channel": "ElectricI4", "g": 0.0, "R0": 1.0},
            "grids": {"cells_per_axis": 2, "gauss_order": 2},
            "scatter": {"energies": [-2.0, -1.5, 1.5, 2.0], "max_refine": 0},
            "search": {"region": [0.2, 1.0, -0.5, -0.01], "max_depth": 2}}"#,
    )
    .unwrap()
}

fn run_in(cmd: Command, cfg: &RunConfig, dir: &Path) {
    let out = run(cmd, cfg, &RunOptions { out: dir.to_path_buf(), use_cache: false }).unwrap();
    assert!(out.passed);
}

#[test]
fn free_scattering_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    run_in(Command::Scatter, &free_config(), dir.path());
    let got = std::fs::read_to_string(dir.path().join("scattering.csv")).unwrap();
    assert_eq!(got, std::fs::read_to_string(golden("free_scattering.csv")).unwrap());
}

#[test]
fn free_search_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    run_in(Command::Resonances, &free_config(), dir.path());
    let got = std::fs::read_to_string(dir.path().join("resonances.csv")).unwrap();
    assert_eq!(got, std::fs::read_to_string(golden("free_resonances.csv")).unwrap());
    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("search_log.json")).unwrap()).unwrap();
    assert_eq!(log["total_count"], 0);
    assert_eq!(log["multiplicity_sum"], 0);
}

#[test]
fn free_verify_report_passes_with_exact_scattering_checks() {
    let dir = tempfile::tempdir().unwrap();
    run_in(Command::Verify, &free_config(), dir.path());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
    let checks = report["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "anticommutation",
            "projectors",
            "fw_conjugation",
            "kernel_fd",
            "fw_trace_consistency(1.5)",
            "sheet_jump(1.5+0.3i)",
            "sheet_jump(0+2i)",
            "unitarity(1.5)",
            "reciprocity(1.5+0.2i)"
        ]
    );
    assert_eq!(checks[0]["residual"], 0.0);
    assert_eq!(checks[7]["residual"], 0.0);
    assert_eq!(checks[8]["residual"], 0.0);
}

#[test]
fn oracle_matches_golden_file() {
    let cfg = parse_config(
        r#"{"potential": {"channel": "ElectricI4", "g": 2.0, "R0": 1.0},
            "search": {"region": [-3.0, -0.2, -1.5, -0.01]}}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_in(Command::Oracle, &cfg, dir.path());
    let got: Vec<ResonanceRecord> = read_csv(&dir.path().join("resonances.csv")).unwrap();
    let want: Vec<ResonanceRecord> = read_csv(&golden("oracle_g2.csv")).unwrap();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g.re_lambda - w.re_lambda).abs() < 1e-8, "{g:?} vs {w:?}");
        assert!((g.im_lambda - w.im_lambda).abs() < 1e-8, "{g:?} vs {w:?}");
        assert!(g.residual < 1e-8);
        assert_eq!((g.multiplicity, &g.sheet, &g.method, &g.flags), (w.multiplicity, &w.sheet, &w.method, &w.flags));
    }
}

#[test]
fn run_config_records_filled_in_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = free_config();
    run_in(Command::Scatter, &cfg, dir.path());
    let text = std::fs::read_to_string(dir.path().join("run_config.json")).unwrap();
    assert_eq!(parse_config(&text).unwrap(), cfg);
    assert!(text.contains("\"cutoff_margin\": 0.25"));
}

#[test]
fn artifacts_use_lf_line_ends() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = free_config();
    run_in(Command::Scatter, &cfg, dir.path());
    run_in(Command::Verify, &cfg, dir.path());
    for name in ["scattering.csv", "verify_report.json", "run_config.json"] {
        let bytes = std::fs::read(dir.path().join(name)).unwrap();
        assert!(!bytes.contains(&b'\r'), "{name} contains CR");
        assert_eq!(bytes.last(), Some(&b'\n'), "{name} lacks a final newline");
    }
}
