//! Subcommand drivers. Each run writes `run_config.json` (the validated
//! configuration with defaults filled in) next to its artifacts; all files
//! are written at the end of the run from a single thread.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use diracres::cache::DetCache;
use diracres::error::{Error, Result};
use diracres::linalg::LogDet;
use diracres::nystrom::{NystromDet, NystromGrid, SheetRule};
use diracres::potential::MatrixPotential;
use diracres::quadrature::{build_sphere_quadrature, build_volume_quadrature, SphereQuadrature};
use diracres::radial::{partial_wave_cutoff, radial_bound_states, radial_resonances, radial_shift_curve};
use diracres::resolvent::CutoffProfile;
use diracres::scattering::{fw_consistency_residual, scattering_matrix, spectral_shift_curve, ScatteringSetup, ShiftPoint};
use diracres::search::{find_real_zeros, find_zeros, Method, Rect, SearchOutcome};
use diracres::spectral::Sheet;
use diracres::trace::{birman_krein_pairing, compare_trace, resonance_pairing, threshold_graded_grid, TestFunction, TraceReport};
use diracres::verify::{
    check_anticommutation, check_fw_conjugation, check_kernel_fd, check_projectors, check_reciprocity, check_sheet_jump,
    check_unitarity, CheckResult,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{RunConfig, TraceModel};
use crate::records::{write_json, write_resonances, write_scattering, ScatteringRecord};

/// Subcommands of the driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Resonances,
    Spectrum,
    Scatter,
    TraceCheck,
    Oracle,
    Verify,
}

/// Where and how a run writes.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub use_cache: bool,
}

/// Files written and whether every requested check passed.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Exit code category of an error.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::ParseError(_) | Error::ValidationError(_) | Error::InvalidResolution(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_CHECK_FAILED,
        Err(e) => error_exit_code(e),
    }
}

/// Everything the 3D discretisation needs, built from the config.
pub struct Discretisation {
    pub v: MatrixPotential,
    pub chi: CutoffProfile,
    pub grid: NystromGrid,
    pub sphere: SphereQuadrature,
}

impl Discretisation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let v = cfg.potential()?;
        let g = &cfg.grids;
        let chi = CutoffProfile::new(v.r0(), g.cutoff_margin)?;
        let quad = build_volume_quadrature(v.r0(), g.cutoff_margin, g.cells_per_axis as usize, g.gauss_order as usize)?;
        let grid = NystromGrid::for_potential(Arc::new(quad), chi, &v);
        let sphere = build_sphere_quadrature(g.polar_order as usize, g.azimuthal_count as usize)?;
        Ok(Discretisation { v, chi, grid, sphere })
    }

    pub fn setup(&self) -> ScatteringSetup<'_> {
        ScatteringSetup { v: &self.v, grid: &self.grid, sphere: &self.sphere }
    }
}

#[derive(Serialize)]
struct SearchLog<'a> {
    region: Rect,
    total_count: i64,
    multiplicity_sum: usize,
    evaluations: usize,
    leaves: &'a [diracres::search::LeafCount],
}

#[derive(Serialize)]
struct ErrorReport {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

/// Run one subcommand; on failure an `error.json` is written to the output
/// directory (when it can be created) before the error is returned.
pub fn run(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    std::fs::create_dir_all(&opts.out)?;
    let result = run_inner(cmd, cfg, opts);
    if let Err(e) = &result {
        let kind = if error_exit_code(e) == EXIT_CONFIG { "config" } else { "numerical" };
        let _ = write_json(&opts.out.join("error.json"), &ErrorReport { kind, message: e.to_string() });
    }
    result
}

fn run_inner(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let out = &opts.out;
    let mut files = vec![out.join("run_config.json")];
    let mut passed = true;
    match cmd {
        Command::Resonances => {
            let d = Discretisation::new(cfg)?;
            let cache = open_cache(out, opts.use_cache)?;
            let f = NystromDet::new(&d.v, &d.grid, SheetRule::Fixed(cfg.search.sheet), cache.as_ref());
            let found = find_zeros(&f, &cfg.region()?, cfg.search.sheet, Method::Nystrom, &cfg.search_options())?;
            if let Some(c) = &cache {
                c.save()?;
            }
            files.push(write_search(out, &found)?);
            files.push(out.join("search_log.json"));
        }
        Command::Spectrum => {
            let d = Discretisation::new(cfg)?;
            let cache = open_cache(out, opts.use_cache)?;
            let f = NystromDet::new(&d.v, &d.grid, SheetRule::Fixed(Sheet::Physical), cache.as_ref());
            let z = find_real_zeros(
                &f,
                cfg.spectrum.interval,
                cfg.spectrum.samples as usize,
                Sheet::Physical,
                Method::Nystrom,
                &cfg.search_options(),
            )?;
            if let Some(c) = &cache {
                c.save()?;
            }
            let path = out.join("spectrum.csv");
            write_resonances(&path, &z)?;
            files.push(path);
        }
        Command::Scatter => {
            let d = Discretisation::new(cfg)?;
            let rows = scatter_rows(&d, &cfg.scatter.energies, cfg.scatter.max_refine as usize)?;
            let path = out.join("scattering.csv");
            write_scattering(&path, &rows)?;
            files.push(path);
        }
        Command::TraceCheck => {
            let report = trace_check(cfg)?;
            passed = report.pass;
            let path = out.join("trace_report.json");
            write_json(&path, &report)?;
            files.push(path);
        }
        Command::Oracle => {
            let v = cfg.potential()?;
            let region = cfg.region()?;
            let z = radial_resonances(&v, &region, cfg.oracle.kappa_max as u32, &cfg.search_options())?;
            let path = out.join("resonances.csv");
            write_resonances(&path, &z)?;
            files.push(path);
        }
        Command::Verify => {
            let report = verify(cfg)?;
            passed = report.all_pass;
            let path = out.join("verify_report.json");
            write_json(&path, &report)?;
            files.push(path);
        }
    }
    write_json(&out.join("run_config.json"), cfg)?;
    Ok(RunOutcome { files, passed })
}

fn open_cache(out: &Path, use_cache: bool) -> Result<Option<DetCache>> {
    if use_cache {
        Ok(Some(DetCache::open(out.join("det_cache.jsonl"))?))
    } else {
        Ok(None)
    }
}

fn write_search(out: &Path, found: &SearchOutcome) -> Result<PathBuf> {
    let path = out.join("resonances.csv");
    write_resonances(&path, &found.zeros)?;
    write_json(
        &out.join("search_log.json"),
        &SearchLog {
            region: found.region,
            total_count: found.total_count,
            multiplicity_sum: found.multiplicity_sum(),
            evaluations: found.evaluations,
            leaves: &found.leaves,
        },
    )?;
    Ok(path)
}

/// Scattering determinant, unwrapped `ξ` and unitarity residual at the
/// requested energies and at every energy the phase refinement adds.
pub fn scatter_rows(d: &Discretisation, energies: &[f64], max_refine: usize) -> Result<Vec<ScatteringRecord>> {
    let setup = d.setup();
    let residuals: Mutex<BTreeMap<u64, f64>> = Mutex::new(BTreeMap::new());
    let sample = |l: f64| {
        let s = scattering_matrix(l, &setup)?;
        residuals.lock().expect("residual map poisoned").insert(l.to_bits(), s.unitarity_residual);
        Ok(s.s)
    };
    let curve = spectral_shift_curve(&sample, energies, max_refine)?;
    let residuals = residuals.into_inner().expect("residual map poisoned");
    Ok(curve
        .iter()
        .map(|p| {
            let s = Complex64::from_polar(p.s.log_abs.exp(), p.s.arg);
            ScatteringRecord {
                lambda: p.lambda,
                re_s: s.re,
                im_s: s.im,
                xi: p.xi,
                unitarity_residual: residuals.get(&p.lambda.to_bits()).copied().unwrap_or(f64::NAN),
            }
        })
        .collect())
}

/// Offset of the first spectral-shift sample from the thresholds.
const TRACE_THRESHOLD_OFFSET: f64 = 2e-3;
/// Refinement rounds of the spectral shift curve.
const TRACE_MAX_REFINE: usize = 12;

/// Both sides of the trace formula for the configured test function.
pub fn trace_check(cfg: &RunConfig) -> Result<TraceReport> {
    let t = &cfg.trace;
    let phi = TestFunction::new(t.t0, t.w)?;
    let v = cfg.potential()?;
    let opts = cfg.search_options();
    // resonances are located beyond the cutoff as well, to measure the
    // depth of the first excluded one
    let reach = 2.0 * t.lambda;
    let region = Rect::new(-reach, reach, -t.depth, -0.01)?;
    let curve = |samples: usize| -> Result<Vec<ShiftPoint>> {
        let grid = threshold_graded_grid(t.lambda_max, samples, TRACE_THRESHOLD_OFFSET);
        match t.model {
            TraceModel::Radial => radial_shift_curve(&v, &grid, partial_wave_cutoff(t.lambda_max, v.r0()), TRACE_MAX_REFINE),
            TraceModel::Nystrom => {
                let d = Discretisation::new(cfg)?;
                Ok(scatter_rows(&d, &grid, TRACE_MAX_REFINE)?
                    .iter()
                    .map(|r| ShiftPoint {
                        lambda: r.lambda,
                        xi: r.xi,
                        s: LogDet::from_complex(Complex64::new(r.re_s, r.im_s)).into(),
                    })
                    .collect())
            }
        }
    };
    let (resonances, bound) = match t.model {
        TraceModel::Radial => {
            let kres = partial_wave_cutoff(reach, v.r0());
            let res = radial_resonances(&v, &region, kres, &opts)?;
            let bound = radial_bound_states(&v, cfg.spectrum.interval, kres, cfg.spectrum.samples as usize, &opts)?;
            (res, bound)
        }
        TraceModel::Nystrom => {
            let d = Discretisation::new(cfg)?;
            let f = NystromDet::new(&d.v, &d.grid, SheetRule::Fixed(Sheet::Second), None);
            let res = find_zeros(&f, &region, Sheet::Second, Method::Nystrom, &opts)?.zeros;
            let fb = NystromDet::new(&d.v, &d.grid, SheetRule::Fixed(Sheet::Physical), None);
            let bound = find_real_zeros(
                &fb,
                cfg.spectrum.interval,
                cfg.spectrum.samples as usize,
                Sheet::Physical,
                Method::Nystrom,
                &opts,
            )?;
            (res, bound)
        }
    };
    // the spectral side at the configured sampling and at twice that; their
    // difference is the discretization budget
    let coarse = birman_krein_pairing(&phi, &curve(t.samples as usize)?, &bound)?;
    let lhs = birman_krein_pairing(&phi, &curve(2 * t.samples as usize)?, &bound)?;
    let excluded_depth = resonances
        .iter()
        .filter(|r| r.lambda.norm() > t.lambda)
        .map(|r| r.lambda.im.abs())
        .fold(t.depth, f64::min);
    let rhs = resonance_pairing(&phi, &resonances, &bound, t.lambda, excluded_depth);
    Ok(compare_trace(&lhs, &rhs, t.lambda, (lhs.lhs - coarse.lhs).abs()))
}

/// The identity suite at the configured grids.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let d = Discretisation::new(cfg)?;
    let quad = d.grid.quad.clone();
    let mut checks = vec![
        check_anticommutation(),
        check_projectors(cfg.seed, 100),
        check_fw_conjugation(cfg.seed, 100),
        check_kernel_fd(cfg.seed, 20)?,
    ];
    let nodes: Vec<[f64; 3]> = (0..d.grid.len()).step_by(7).map(|k| d.grid.node(k)).collect();
    checks.push(CheckResult::new("fw_trace_consistency(1.5)", fw_consistency_residual(1.5, &d.chi, &nodes, &d.sphere)?, 1e-10));
    for lambda in [Complex64::new(1.5, 0.3), Complex64::new(0.0, 2.0)] {
        checks.push(check_sheet_jump(lambda, &quad, &d.chi, &d.sphere)?);
    }
    checks.push(check_unitarity(1.5, &d.setup())?);
    checks.push(check_reciprocity(Complex64::new(1.5, 0.2), &d.setup())?);
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, all_pass })
}
