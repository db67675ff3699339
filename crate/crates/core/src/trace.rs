//! Pairings of the wave trace formula against smooth test functions
//! supported away from `t = 0`: the spectral side from the spectral shift
//! function, the resonance side from located resonances and eigenvalues.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scattering::ShiftPoint;
use crate::search::Resonance;

/// Gauss–Legendre order of one panel of the time quadrature.
const PANEL_ORDER: usize = 24;
/// Relative agreement of two panel counts that ends the panel doubling.
const TIME_RTOL: f64 = 1e-13;
const MAX_PANELS: usize = 4096;
/// Gauss order per interval of the `λ` quadrature.
const LAMBDA_ORDER: usize = 6;
/// A phase step of `ξ` (in units of 2π) above this between the first two
/// samples next to a threshold triggers a warning.
const THRESHOLD_STEP: f64 = 0.05;

/// Smooth bump `φ(t) = exp(1 - 1/(1 - u²))`, `u = (t - t0)/w`, supported in
/// `|t - t0| < w`, with `φ(t0) = 1`; the support excludes `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub halfwidth: f64,
}

impl TestFunction {
    pub fn new(center: f64, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0) || !center.is_finite() || center.abs() <= halfwidth {
            return Err(Error::ValidationError(format!(
                "test function support [{}, {}] must exclude t = 0",
                center - halfwidth,
                center + halfwidth
            )));
        }
        Ok(Self { center, halfwidth })
    }

    pub fn value(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.halfwidth;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }

    pub fn support(&self) -> [f64; 2] {
        [self.center - self.halfwidth, self.center + self.halfwidth]
    }

    /// `inf |t|` over the support.
    pub fn gap(&self) -> f64 {
        self.center.abs() - self.halfwidth
    }

    /// `t ↦ φ(-t)`.
    pub fn mirrored(&self) -> Self {
        Self { center: -self.center, halfwidth: self.halfwidth }
    }

    /// `∫ φ(t) g(t) dt` by composite Gauss–Legendre, doubling the number of
    /// panels until two successive values agree.
    pub fn integrate(&self, g: impl Fn(f64) -> Complex64) -> Complex64 {
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let [a, b] = self.support();
        let rule = |panels: usize| {
            let h = (b - a) / panels as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..panels {
                let mid = a + (p as f64 + 0.5) * h;
                for (xi, wi) in x.iter().zip(&w) {
                    let t = mid + 0.5 * h * xi;
                    acc += g(t) * (self.value(t) * wi * 0.5 * h);
                }
            }
            acc
        };
        let mut panels = 4;
        let mut prev = rule(panels);
        while panels < MAX_PANELS {
            panels *= 2;
            let next = rule(panels);
            if (next - prev).norm() <= TIME_RTOL * next.norm().max(self.halfwidth * 1e-3) {
                return next;
            }
            prev = next;
        }
        prev
    }

    /// `∫ φ(t) 2cos(tλ) dt`.
    pub fn cosine_transform(&self, lambda: Complex64) -> Complex64 {
        self.integrate(|t| 2.0 * (lambda * t).cos())
    }

    /// `d/dλ ∫ φ(t) 2cos(tλ) dt = -∫ φ(t) 2t sin(tλ) dt`.
    pub fn cosine_transform_derivative(&self, lambda: Complex64) -> Complex64 {
        self.integrate(|t| -2.0 * t * (lambda * t).sin())
    }

    /// `∫ φ(t) e^{i|t|z} dt`.
    pub fn exp_pairing(&self, z: Complex64) -> Complex64 {
        self.integrate(|t| (Complex64::i() * z * t.abs()).exp())
    }
}

/// `∫ φ(t) 2cos(tλ) dt`.
pub fn cosine_transform(phi: &TestFunction, lambda: Complex64) -> Complex64 {
    phi.cosine_transform(lambda)
}

/// Resonance side of the pairing with its parts.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResonancePairing {
    pub rhs: f64,
    /// Sum over resonances in the upper half-plane.
    pub upper: f64,
    /// Sum over resonances in the lower half-plane (entering with sign -1).
    pub lower: f64,
    pub discrete: f64,
    pub tail_estimate: f64,
    pub imag_part: f64,
}

/// Contribution `∫φ(e^{-i|t| conj λ} + e^{i|t|λ})` of an upper-half-plane
/// resonance.
pub fn upper_term(phi: &TestFunction, lambda: Complex64) -> Complex64 {
    phi.exp_pairing(-lambda.conj()) + phi.exp_pairing(lambda)
}

/// Contribution `∫φ(e^{-i|t|λ} + e^{i|t| conj λ})` of a lower-half-plane
/// resonance.
pub fn lower_term(phi: &TestFunction, lambda: Complex64) -> Complex64 {
    phi.exp_pairing(-lambda) + phi.exp_pairing(lambda.conj())
}

/// Resonance side: resonances with `|λ| <= cutoff` split by half-plane, plus
/// `Σ 2m ∫φ cos(tλ)` over eigenvalues.
///
/// `excluded_depth` is `min |Im λ|` over resonances known to be left out
/// (beyond the cutoff or below the search region); the tail estimate is
/// `C Λ³ e^{-a μ} · 2∫φ` with `C` fitted to the included count, `a` the
/// distance of the support from 0 and `μ` this depth. Each left-out
/// resonance contributes at most `2∫φ e^{-a|Im λ|}`.
pub fn resonance_pairing(
    phi: &TestFunction,
    resonances: &[Resonance],
    discrete_spectrum: &[Resonance],
    cutoff: f64,
    excluded_depth: f64,
) -> ResonancePairing {
    let mut upper = Complex64::new(0.0, 0.0);
    let mut lower = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for r in resonances.iter().filter(|r| r.lambda.norm() <= cutoff) {
        let m = r.multiplicity as f64;
        count += r.multiplicity;
        if r.lambda.im > 0.0 {
            upper += upper_term(phi, r.lambda) * m;
        } else {
            lower += lower_term(phi, r.lambda) * m;
        }
    }
    let mut discrete = Complex64::new(0.0, 0.0);
    for e in discrete_spectrum {
        discrete += phi.cosine_transform(e.lambda) * e.multiplicity as f64;
    }
    let total = upper - lower + discrete;
    let mass = phi.integrate(|_| Complex64::new(1.0, 0.0)).re;
    let c_fit = (count.max(1) as f64) / cutoff.powi(3);
    let tail = c_fit * cutoff.powi(3) * (-phi.gap() * excluded_depth).exp() * 2.0 * mass;
    ResonancePairing {
        rhs: total.re,
        upper: upper.re,
        lower: -lower.re,
        discrete: discrete.re,
        tail_estimate: tail,
        imag_part: total.im,
    }
}

/// Spectral side of the pairing with its parts.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BirmanKreinPairing {
    pub lhs: f64,
    /// `∫ f ξ'` over `|λ| > 1`.
    pub continuous: f64,
    pub discrete: f64,
    /// `|ξ|` step between the two samples closest to a threshold exceeded
    /// the warning level.
    pub threshold_warning: bool,
}

/// Spectral side `∫_{|λ|>1} f ξ' dλ + Σ m f(λ_j)` with `f` the cosine
/// transform of `φ`, evaluated by parts (`[fξ] - ∫ f' ξ`) on each half-line
/// from samples of `ξ`; `ξ` is interpolated by local cubics. Each half-line
/// is integrated over the range of its samples.
pub fn birman_krein_pairing(
    phi: &TestFunction,
    curve: &[ShiftPoint],
    discrete_spectrum: &[Resonance],
) -> Result<BirmanKreinPairing> {
    let mut continuous = 0.0;
    let mut warning = false;
    for positive in [false, true] {
        let mut pts: Vec<(f64, f64)> =
            curve.iter().filter(|p| (p.lambda > 0.0) == positive).map(|p| (p.lambda, p.xi)).collect();
        if pts.is_empty() {
            continue;
        }
        if pts.len() < 4 {
            return Err(Error::ValidationError("spectral shift curve needs at least 4 samples per half-line".into()));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = pts.len();
        let (near, next) = if positive { (pts[0], pts[1]) } else { (pts[n - 1], pts[n - 2]) };
        if (next.1 - near.1).abs() > THRESHOLD_STEP {
            warning = true;
        }
        let f = |l: f64| phi.cosine_transform(Complex64::new(l, 0.0)).re;
        let (a, b) = (pts[0], pts[n - 1]);
        let boundary = f(b.0) * b.1 - f(a.0) * a.1;
        let integral = integrate_against(&pts, |l| phi.cosine_transform_derivative(Complex64::new(l, 0.0)).re);
        continuous += boundary - integral;
    }
    let discrete: f64 =
        discrete_spectrum.iter().map(|e| phi.cosine_transform(e.lambda).re * e.multiplicity as f64).sum();
    Ok(BirmanKreinPairing { lhs: continuous + discrete, continuous, discrete, threshold_warning: warning })
}

/// `∫ g(μ) ξ(μ) dμ` over the sample range with `ξ` the local cubic
/// interpolant of the samples.
fn integrate_against(pts: &[(f64, f64)], g: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(LAMBDA_ORDER);
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let (a, b) = (pts[i].0, pts[i + 1].0);
        let s = i.saturating_sub(1).min(n - 4);
        let stencil = &pts[s..s + 4];
        for (xi, wi) in x.iter().zip(&w) {
            let mu = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            acc += wi * 0.5 * (b - a) * g(mu) * lagrange(stencil, mu);
        }
    }
    acc
}

fn lagrange(stencil: &[(f64, f64)], x: f64) -> f64 {
    let mut acc = 0.0;
    for (j, &(xj, yj)) in stencil.iter().enumerate() {
        let mut l = 1.0;
        for (k, &(xk, _)) in stencil.iter().enumerate() {
            if k != j {
                l *= (x - xk) / (xj - xk);
            }
        }
        acc += yj * l;
    }
    acc
}

/// Direct `∫ f ξ' dλ` with `ξ'` from centred differences of the samples;
/// an independent check of the by-parts evaluation.
pub fn birman_krein_direct(phi: &TestFunction, curve: &[ShiftPoint]) -> f64 {
    let mut acc = 0.0;
    for positive in [false, true] {
        let mut pts: Vec<(f64, f64)> =
            curve.iter().filter(|p| (p.lambda > 0.0) == positive).map(|p| (p.lambda, p.xi)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for win in pts.windows(2) {
            let (l0, x0) = win[0];
            let (l1, x1) = win[1];
            let mid = 0.5 * (l0 + l1);
            acc += phi.cosine_transform(Complex64::new(mid, 0.0)).re * (x1 - x0);
        }
    }
    acc
}

/// Samples `1 + (Λ_max - 1 - δ)(k/n)² + δ`, graded towards the threshold,
/// on both half-lines (negative half first, ascending).
pub fn threshold_graded_grid(lambda_max: f64, n: usize, offset: f64) -> Vec<f64> {
    let pos: Vec<f64> =
        (0..=n).map(|k| 1.0 + offset + (lambda_max - 1.0 - offset) * (k as f64 / n as f64).powi(2)).collect();
    let mut out: Vec<f64> = pos.iter().rev().map(|l| -l).collect();
    out.extend(pos);
    out
}

/// Both sides of the trace formula for one test function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_tail_estimate: f64,
    pub truncation_radius: f64,
    pub breakdown: TraceBreakdown,
    pub difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceBreakdown {
    pub continuous_integral: f64,
    pub discrete_spectrum_sum: f64,
    pub resonance_sum_upper: f64,
    pub resonance_sum_lower: f64,
    pub lhs_imag: f64,
    pub rhs_imag: f64,
    pub threshold_warning: bool,
}

/// Assemble the report; `budget` is the discretization budget added to the
/// tail estimate.
pub fn compare_trace(lhs: &BirmanKreinPairing, rhs: &ResonancePairing, cutoff: f64, budget: f64) -> TraceReport {
    let difference = (lhs.lhs - rhs.rhs).abs();
    let tolerance = (0.1 * lhs.lhs.abs()).max(rhs.tail_estimate + budget);
    TraceReport {
        lhs: lhs.lhs,
        rhs: rhs.rhs,
        rhs_tail_estimate: rhs.tail_estimate,
        truncation_radius: cutoff,
        breakdown: TraceBreakdown {
            continuous_integral: lhs.continuous,
            discrete_spectrum_sum: lhs.discrete,
            resonance_sum_upper: rhs.upper,
            resonance_sum_lower: rhs.lower,
            lhs_imag: 0.0,
            rhs_imag: rhs.imag_part,
            threshold_warning: lhs.threshold_warning,
        },
        difference,
        tolerance,
        pass: difference <= tolerance,
    }
}
