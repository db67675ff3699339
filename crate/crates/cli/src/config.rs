//! Run configuration: JSON with defaults, unknown keys rejected, every
//! numeric range validated at load.

use std::path::Path;

use diracres::dirac::Mat4;
use diracres::error::{Error, Result};
use diracres::potential::{Channel, MatrixPotential};
use diracres::search::{Rect, SearchOptions};
use diracres::spectral::Sheet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub scatter: ScatterConfig,
    #[serde(default)]
    pub trace: TraceConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub channel: Channel,
    pub g: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    /// Sixteen `[re, im]` entries, row-major; only for `CustomHermitian`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub cells_per_axis: i64,
    pub gauss_order: i64,
    pub polar_order: i64,
    pub azimuthal_count: i64,
    pub cutoff_margin: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { cells_per_axis: 8, gauss_order: 2, polar_order: 16, azimuthal_count: 32, cutoff_margin: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// `[re_min, re_max, im_min, im_max]`.
    pub region: [f64; 4],
    pub sheet: Sheet,
    pub max_depth: i64,
    pub min_box: f64,
    pub sample_spacing: f64,
    pub max_phase_step: f64,
    pub newton_tol: f64,
    pub residual_rel: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let o = SearchOptions::default();
        SearchConfig {
            region: [0.2, 3.0, -1.5, -0.01],
            sheet: Sheet::Second,
            max_depth: o.max_depth as i64,
            min_box: o.min_box,
            sample_spacing: o.sample_spacing,
            max_phase_step: o.max_phase_step,
            newton_tol: o.newton_tol,
            residual_rel: o.residual_rel,
        }
    }
}

/// Scan of the spectral gap for eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub interval: [f64; 2],
    pub samples: i64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { interval: [-0.999, 0.999], samples: 200 }
    }
}

/// Energies at which `S` is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterConfig {
    pub energies: Vec<f64>,
    pub max_refine: i64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        let pos: Vec<f64> = (0..=19).map(|k| 1.1 + 0.1 * k as f64).collect();
        let mut energies: Vec<f64> = pos.iter().rev().map(|l| -l).collect();
        energies.extend(pos);
        ScatterConfig { energies, max_refine: 6 }
    }
}

/// Which discretisation the trace check uses on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceModel {
    /// Partial waves (electric channel only).
    Radial,
    /// The 3D Nyström discretisation.
    Nystrom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceConfig {
    pub t0: f64,
    pub w: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "Lambda_max")]
    pub lambda_max: f64,
    /// Samples of `ξ` per half-line before refinement.
    pub samples: i64,
    /// Depth `|Im λ|` of the resonance search below the real axis.
    pub depth: f64,
    pub model: TraceModel,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig { t0: 3.0, w: 1.0, lambda: 4.0, lambda_max: 40.0, samples: 150, depth: 6.0, model: TraceModel::Radial }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub kappa_max: i64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { kappa_max: 6 }
    }
}

/// Read, parse and validate a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Every range violation, collected into one error.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                bad.push(msg);
            }
        };
        let p = &self.potential;
        need(p.g.is_finite(), format!("potential.g must be finite, got {}", p.g));
        need(p.r0 > 0.0 && p.r0.is_finite(), format!("potential.R0 must be positive, got {}", p.r0));
        match (&p.channel, &p.matrix) {
            (Channel::CustomHermitian, None) => need(false, "potential.matrix is required for CustomHermitian".into()),
            (Channel::CustomHermitian, Some(m)) => {
                if m.len() != 16 {
                    need(false, format!("potential.matrix needs 16 entries, got {}", m.len()));
                } else if let Some(msg) = hermiticity_defect(m) {
                    need(false, msg);
                }
            }
            (_, Some(_)) => need(false, "potential.matrix is only allowed for CustomHermitian".into()),
            _ => {}
        }
        let g = &self.grids;
        need((2..=64).contains(&g.cells_per_axis), format!("grids.cells_per_axis must be in 2..=64, got {}", g.cells_per_axis));
        need((1..=8).contains(&g.gauss_order), format!("grids.gauss_order must be in 1..=8, got {}", g.gauss_order));
        need((4..=128).contains(&g.polar_order), format!("grids.polar_order must be in 4..=128, got {}", g.polar_order));
        need((8..=256).contains(&g.azimuthal_count), format!("grids.azimuthal_count must be in 8..=256, got {}", g.azimuthal_count));
        need(
            g.cutoff_margin > 0.0 && g.cutoff_margin <= 1.0,
            format!("grids.cutoff_margin must be in (0, 1], got {}", g.cutoff_margin),
        );
        let s = &self.search;
        let [a, b, c, d] = s.region;
        need(
            s.region.iter().all(|x| x.is_finite()) && a < b && c < d,
            format!("search.region must be [re_min < re_max, im_min < im_max], got {:?}", s.region),
        );
        need((1..=40).contains(&s.max_depth), format!("search.max_depth must be in 1..=40, got {}", s.max_depth));
        for (name, v) in [
            ("min_box", s.min_box),
            ("sample_spacing", s.sample_spacing),
            ("newton_tol", s.newton_tol),
            ("residual_rel", s.residual_rel),
        ] {
            need(v > 0.0 && v.is_finite(), format!("search.{name} must be positive, got {v}"));
        }
        need(
            s.max_phase_step > 0.0 && s.max_phase_step < std::f64::consts::PI,
            format!("search.max_phase_step must be in (0, pi), got {}", s.max_phase_step),
        );
        let sp = &self.spectrum;
        need(
            -1.0 < sp.interval[0] && sp.interval[0] < sp.interval[1] && sp.interval[1] < 1.0,
            format!("spectrum.interval must lie inside (-1, 1), got {:?}", sp.interval),
        );
        need(sp.samples >= 3, format!("spectrum.samples must be at least 3, got {}", sp.samples));
        let sc = &self.scatter;
        need(!sc.energies.is_empty(), "scatter.energies must not be empty".into());
        for &e in &sc.energies {
            need(e.is_finite() && e.abs() > 1.0 + 1e-3, format!("scatter energy {e} must satisfy |lambda| > 1.001"));
        }
        need((0..=20).contains(&sc.max_refine), format!("scatter.max_refine must be in 0..=20, got {}", sc.max_refine));
        let t = &self.trace;
        need(t.w > 0.0 && t.t0.abs() > t.w, format!("trace: need 0 < w < |t0|, got t0 = {}, w = {}", t.t0, t.w));
        need(t.lambda > 0.0, format!("trace.Lambda must be positive, got {}", t.lambda));
        need(t.lambda_max > 1.01, format!("trace.Lambda_max must exceed 1.01, got {}", t.lambda_max));
        need(t.samples >= 4, format!("trace.samples must be at least 4, got {}", t.samples));
        need(t.depth > 0.01, format!("trace.depth must exceed 0.01, got {}", t.depth));
        need(
            t.model != TraceModel::Radial || p.channel == Channel::ElectricI4,
            "trace.model Radial requires the ElectricI4 channel".into(),
        );
        need((1..=200).contains(&self.oracle.kappa_max), format!("oracle.kappa_max must be in 1..=200, got {}", self.oracle.kappa_max));
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::ValidationError(bad.join("; ")))
        }
    }

    pub fn potential(&self) -> Result<MatrixPotential> {
        let p = &self.potential;
        match p.channel {
            Channel::ElectricI4 => MatrixPotential::electric(p.g, p.r0),
            Channel::ScalarBeta => MatrixPotential::scalar_beta(p.g, p.r0),
            Channel::CustomHermitian => {
                let m = p.matrix.as_ref().ok_or_else(|| Error::ValidationError("missing matrix".into()))?;
                MatrixPotential::custom(p.g, p.r0, matrix_from_entries(m))
            }
        }
    }

    pub fn region(&self) -> Result<Rect> {
        let [a, b, c, d] = self.search.region;
        Rect::new(a, b, c, d)
    }

    pub fn search_options(&self) -> SearchOptions {
        let s = &self.search;
        SearchOptions {
            max_depth: s.max_depth as usize,
            min_box: s.min_box,
            sample_spacing: s.sample_spacing,
            max_phase_step: s.max_phase_step,
            newton_tol: s.newton_tol,
            residual_rel: s.residual_rel,
            ..SearchOptions::default()
        }
    }
}

fn matrix_from_entries(m: &[[f64; 2]]) -> Mat4 {
    Mat4::from_fn(|i, j| Complex64::new(m[4 * i + j][0], m[4 * i + j][1]))
}

/// Description of the largest entry of `M - M*` if it exceeds `1e-12`.
fn hermiticity_defect(m: &[[f64; 2]]) -> Option<String> {
    let mat = matrix_from_entries(m);
    let mut worst = (0.0, 0, 0);
    for i in 0..4 {
        for j in 0..4 {
            let d = (mat.0[i][j] - mat.0[j][i].conj()).norm();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    let (d, i, j) = worst;
    (d > 1e-12).then(|| {
        format!(
            "potential.matrix is not Hermitian: |M[{i}][{j}] - conj(M[{j}][{i}])| = {d:.3e} ({} vs {})",
            mat.0[i][j],
            mat.0[j][i].conj()
        )
    })
}
