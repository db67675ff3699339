//! Far-field operators, the scattering matrix
//! `S(lambda) = I - 2 pi i E(lambda) V (I + chi R0(lambda) V)^{-1} E(lambda)^*`,
//! the scattering determinant and the spectral shift function.
//!
//! Sphere vectors are stored weight-symmetrised: the stored matrix is
//! `nu^{1/2} S nu^{-1/2}`, so unitarity of `S` on `L^2(S^2)` is plain matrix
//! unitarity. For complex `lambda` every kernel is continued analytically:
//! the Physical sheet above the real axis, the Second sheet below it.

use crate::dirac::{fw_transform, Mat4};
use crate::error::{Error, Result};
use crate::linalg::{largest_singular_value, wrap_angle, LogDet, LuFactor};
use crate::nystrom::{assemble_k, apply_potential_left, NystromGrid, SheetRule};
use crate::potential::MatrixPotential;
use crate::quadrature::{SphereQuadrature, VolumeQuadrature};
use crate::resolvent::{farfield_adjoint_kernel, farfield_kernel, farfield_prefactor, sheet_jump_kernel, CutoffProfile};
use crate::spectral::{Sheet, SpectralParameter};
use faer::{Mat, Scale};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest admissible distance of a real energy from the thresholds `+-1`.
pub const THRESHOLD_MARGIN: f64 = 1e-3;
/// Largest pivot ratio of `I + K` accepted by [`scattering_matrix`].
pub const MAX_CONDITION: f64 = 1e10;

/// Dense far-field operator on a set of volume nodes.
pub struct FarFieldOperator {
    /// `4M x 4N` matrix with entries `E(omega_k, x_j) w_j`.
    pub matrix: Mat<Complex64>,
    pub sp: SpectralParameter,
}

fn write_block(m: &mut Mat<Complex64>, r: usize, c: usize, b: &Mat4, s: Complex64) {
    for a in 0..4 {
        for d in 0..4 {
            m[(4 * r + a, 4 * c + d)] = b.0[a][d] * s;
        }
    }
}

/// `E_chi(lambda)` on `nodes` with volume weights folded into the columns.
pub fn assemble_e(
    sp: &SpectralParameter,
    chi: &CutoffProfile,
    nodes: &[[f64; 3]],
    weights: &[f64],
    sphere: &SphereQuadrature,
) -> Result<FarFieldOperator> {
    farfield_prefactor(sp)?;
    let mut matrix = Mat::<Complex64>::zeros(4 * sphere.len(), 4 * nodes.len());
    for (k, w) in sphere.nodes.iter().enumerate() {
        for (j, x) in nodes.iter().enumerate() {
            let b = farfield_kernel(sp, *w, *x, chi)?;
            write_block(&mut matrix, k, j, &b, Complex64::new(weights[j], 0.0));
        }
    }
    Ok(FarFieldOperator { matrix, sp: *sp })
}

/// The continued adjoint `E_chi(conj lambda)^*` on `nodes`, `4N x 4M`, with
/// the sphere weights folded into the columns. For real `lambda` this is the
/// Hilbert-space adjoint of [`assemble_e`] with respect to the quadratures.
pub fn assemble_e_adjoint(
    sp: &SpectralParameter,
    chi: &CutoffProfile,
    nodes: &[[f64; 3]],
    sphere: &SphereQuadrature,
) -> Result<Mat<Complex64>> {
    farfield_prefactor(sp)?;
    let mut matrix = Mat::<Complex64>::zeros(4 * nodes.len(), 4 * sphere.len());
    for (i, x) in nodes.iter().enumerate() {
        for (k, w) in sphere.nodes.iter().enumerate() {
            let b = farfield_adjoint_kernel(sp, *x, *w, chi)?;
            write_block(&mut matrix, i, k, &b, Complex64::new(sphere.weights[k], 0.0));
        }
    }
    Ok(matrix)
}

/// Operator-norm comparison of the two sides of the sheet-jump identity
/// `chi (R0(lambda) - R0~(lambda)) chi = 2 pi i E_chi(conj lambda)^* E_chi(lambda)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JumpResidual {
    /// `||lhs - rhs|| / ||lhs||` in the quadrature-weighted `L^2` norm.
    pub residual: f64,
    pub lhs_norm: f64,
    pub nodes: usize,
    pub sphere_nodes: usize,
}

/// Evaluate the sheet-jump identity on all volume nodes in the support of
/// `chi`. Both sides are symmetrised with the square roots of the weights so
/// that matrix norms are `L^2` operator norms. The right-hand side is applied
/// matrix-free; norms come from power iteration.
pub fn sheet_jump_residual(
    sp_phys: &SpectralParameter,
    quad: &VolumeQuadrature,
    chi: &CutoffProfile,
    sphere: &SphereQuadrature,
) -> Result<JumpResidual> {
    if sp_phys.sheet != Sheet::Physical {
        return Err(Error::ValidationError("sheet-jump residual expects a Physical-sheet parameter".into()));
    }
    farfield_prefactor(sp_phys)?;
    let idx: Vec<usize> = (0..quad.len()).filter(|&i| chi.eval(quad.nodes[i]) > 0.0).collect();
    let nodes: Vec<[f64; 3]> = idx.iter().map(|&i| quad.nodes[i]).collect();
    let sw: Vec<f64> = idx.iter().map(|&i| quad.weights[i].sqrt()).collect();
    let n = nodes.len();
    let mut lhs = Mat::<Complex64>::zeros(4 * n, 4 * n);
    for i in 0..n {
        let ci = chi.eval(nodes[i]) * sw[i];
        for j in 0..n {
            let b = sheet_jump_kernel(sp_phys, nodes[i], nodes[j]);
            write_block(&mut lhs, i, j, &b, Complex64::new(ci * chi.eval(nodes[j]) * sw[j], 0.0));
        }
    }
    // E with sqrt(w) on columns and sqrt(nu) on rows; E^# likewise.
    let ones = vec![1.0; n];
    let mut e = assemble_e(sp_phys, chi, &nodes, &ones, sphere)?.matrix;
    let mut es = assemble_e_adjoint(sp_phys, chi, &nodes, sphere)?;
    for k in 0..sphere.len() {
        let sn = sphere.weights[k].sqrt();
        for a in 0..4 {
            for j in 0..n {
                for d in 0..4 {
                    e[(4 * k + a, 4 * j + d)] *= sn * sw[j];
                    es[(4 * j + d, 4 * k + a)] *= sw[j] / sn;
                }
            }
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let diff = |v: &Mat<Complex64>| -> Mat<Complex64> { &lhs * v - Scale(two_pi_i) * (&es * (&e * v)) };
    let diff_adj = |v: &Mat<Complex64>| -> Mat<Complex64> {
        lhs.adjoint() * v - Scale(two_pi_i.conj()) * (e.adjoint() * (es.adjoint() * v))
    };
    let d_norm = power_norm(4 * n, &diff, &diff_adj, 1e-3, 200);
    let lhs_norm = largest_singular_value(lhs.as_ref(), 1e-6, 500);
    Ok(JumpResidual { residual: d_norm / lhs_norm, lhs_norm, nodes: n, sphere_nodes: sphere.len() })
}

/// Power iteration for the largest singular value of an operator given by
/// its action and the action of its adjoint.
fn power_norm(
    n: usize,
    apply: &dyn Fn(&Mat<Complex64>) -> Mat<Complex64>,
    apply_adj: &dyn Fn(&Mat<Complex64>) -> Mat<Complex64>,
    rtol: f64,
    max_iter: usize,
) -> f64 {
    let mut v = Mat::<Complex64>::from_fn(n, 1, |i, _| {
        let t = i as f64;
        Complex64::new(1.0 + 0.5 * (0.7 * t).sin(), 0.3 * (1.3 * t).cos())
    });
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let nv = v.norm_l2();
        if nv == 0.0 {
            return 0.0;
        }
        v = Scale(Complex64::new(1.0 / nv, 0.0)) * v;
        let av = apply(&v);
        let next = av.norm_l2();
        if next == 0.0 {
            return 0.0;
        }
        v = apply_adj(&av);
        if (next - sigma).abs() <= rtol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Kernel of the free trace operator `T0(lambda)`:
/// `(2 pi)^{-3/2} c P G(kappa omega) e^{-i kappa omega.x} chi(x)` with
/// `P = (I +- beta)/2` for `+-lambda > 1`. Real `lambda` only.
pub fn free_trace_kernel(sp: &SpectralParameter, omega: [f64; 3], x: [f64; 3], chi: &CutoffProfile) -> Result<Mat4> {
    let c = farfield_prefactor(sp)?;
    let cx = chi.eval(x);
    let xi = omega.map(|w| sp.kappa.re * w);
    let sign = sp.lambda.re.signum();
    let beta = crate::dirac::algebra().beta;
    let p = (Mat4::identity() + beta * sign) * 0.5;
    let dot = omega[0] * x[0] + omega[1] * x[1] + omega[2] * x[2];
    let phase = (-Complex64::i() * sp.kappa * dot).exp();
    Ok(p * fw_transform(xi) * (c * phase * cx * (2.0 * PI).powf(-1.5)))
}

/// `max ||G(kappa omega) E(omega, x) - T0(omega, x)|| / max ||E||` over the
/// sphere nodes and `nodes`, at a real energy `|lambda| > 1`.
pub fn fw_consistency_residual(
    lambda: f64,
    chi: &CutoffProfile,
    nodes: &[[f64; 3]],
    sphere: &SphereQuadrature,
) -> Result<f64> {
    check_real_energy(lambda)?;
    let sp = SpectralParameter::real(lambda, Sheet::Physical)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for w in &sphere.nodes {
        let g = fw_transform(w.map(|c| sp.kappa.re * c));
        for x in nodes {
            let e = farfield_kernel(&sp, *w, *x, chi)?;
            let t = free_trace_kernel(&sp, *w, *x, chi)?;
            worst = worst.max((g * e - t).norm());
            scale = scale.max(e.norm());
        }
    }
    Ok(if scale == 0.0 { 0.0 } else { worst / scale })
}

fn check_real_energy(lambda: f64) -> Result<()> {
    if !(lambda.abs() > 1.0 + THRESHOLD_MARGIN) || !lambda.is_finite() {
        return Err(Error::BranchPoint(Complex64::new(lambda, 0.0)));
    }
    Ok(())
}

/// Scattering matrix at one energy.
pub struct ScatteringSample {
    pub lambda: Complex64,
    /// Weight-symmetrised `nu^{1/2} S nu^{-1/2}`, `4M x 4M`.
    pub s_matrix: Mat<Complex64>,
    /// `det S` in log form.
    pub s: LogDet,
    /// `-arg(s) / 2 pi` reduced to `(-1/2, 1/2]`; unwrapped values come from
    /// [`spectral_shift_curve`].
    pub xi: f64,
    /// `||S S^* - I||` (operator norm).
    pub unitarity_residual: f64,
}

/// Everything [`scattering_matrix`] needs besides the energy.
pub struct ScatteringSetup<'a> {
    pub v: &'a MatrixPotential,
    pub grid: &'a NystromGrid,
    pub sphere: &'a SphereQuadrature,
}

/// `S(lambda)` for real `|lambda| > 1` (boundary value `lambda + i0`).
pub fn scattering_matrix(lambda: f64, setup: &ScatteringSetup<'_>) -> Result<ScatteringSample> {
    check_real_energy(lambda)?;
    scattering_matrix_continued(Complex64::new(lambda, 0.0), setup)
}

/// The meromorphic continuation of `S` from the real axis: Physical-sheet
/// kernels for `Im lambda >= 0`, Second-sheet kernels below.
pub fn scattering_matrix_continued(lambda: Complex64, setup: &ScatteringSetup<'_>) -> Result<ScatteringSample> {
    let sp = SpectralParameter::new(lambda, SheetRule::Continued.sheet_at(lambda))?;
    let sphere = setup.sphere;
    let m4 = 4 * sphere.len();
    let mut s_matrix = Mat::<Complex64>::identity(m4, m4);
    if !setup.v.is_zero() && !setup.grid.is_empty() {
        let grid = setup.grid;
        let nodes: Vec<[f64; 3]> = (0..grid.len()).map(|k| grid.node(k)).collect();
        let weights: Vec<f64> = (0..grid.len()).map(|k| grid.weight(k)).collect();
        let mut a = assemble_k(&sp, setup.v, grid)?.matrix;
        for i in 0..a.nrows() {
            a[(i, i)] += 1.0;
        }
        let lu = LuFactor::new(a);
        let cond = lu.pivot_ratio();
        if !(cond < MAX_CONDITION) {
            return Err(Error::NearResonanceIllConditioned { at: lambda, cond });
        }
        let mut rhs = assemble_e_adjoint(&sp, &grid.chi, &nodes, sphere)?;
        apply_potential_left(&mut rhs, setup.v, grid);
        lu.solve_in_place(rhs.as_mut());
        let e = assemble_e(&sp, &grid.chi, &nodes, &weights, sphere)?.matrix;
        let a_mat = &e * &rhs;
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        for r in 0..m4 {
            let nr = sphere.weights[r / 4].sqrt();
            for c in 0..m4 {
                let nc = sphere.weights[c / 4].sqrt();
                s_matrix[(r, c)] -= two_pi_i * a_mat[(r, c)] * (nr / nc);
            }
        }
    }
    let s = crate::linalg::log_det(s_matrix.clone());
    let mut prod = &s_matrix * s_matrix.adjoint();
    for i in 0..m4 {
        prod[(i, i)] -= 1.0;
    }
    let unitarity_residual = largest_singular_value(prod.as_ref(), 1e-8, 500);
    Ok(ScatteringSample { lambda, s_matrix, s, xi: -s.arg / (2.0 * PI), unitarity_residual })
}

/// `s(lambda) = det S(lambda)`.
pub fn scattering_determinant(sample: &ScatteringSample) -> Complex64 {
    sample.s.to_complex()
}

/// One point of a spectral shift curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub lambda: f64,
    pub xi: f64,
    pub s: LogDetRecord,
}

/// Serializable form of a [`LogDet`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogDetRecord {
    pub log_abs: f64,
    pub arg: f64,
}

impl From<LogDet> for LogDetRecord {
    fn from(d: LogDet) -> Self {
        LogDetRecord { log_abs: d.log_abs, arg: d.arg }
    }
}

/// Largest admissible phase step of `s` between adjacent samples.
pub const MAX_SHIFT_STEP: f64 = PI / 2.0;

/// `xi(lambda) = -(1/2 pi) arg s(lambda)`, unwrapped along each half-line
/// `(1, inf)` and `(-inf, -1)` and anchored so that the sample of largest
/// `|lambda|` on each half-line lies in `(-1/2, 1/2]`.
///
/// Wherever adjacent phases differ by `MAX_SHIFT_STEP` or more, midpoints
/// are inserted (at most `max_refine` rounds). `s` is evaluated by
/// `sample`, which may run in parallel; the unwrap pass is sequential.
pub fn spectral_shift_curve(
    sample: &(dyn Fn(f64) -> Result<LogDet> + Sync),
    lambdas: &[f64],
    max_refine: usize,
) -> Result<Vec<ShiftPoint>> {
    let multi = |l: f64| sample(l).map(|d| vec![d]);
    spectral_shift_curve_factored(&multi, &[1.0], lambdas, max_refine)
}

/// As [`spectral_shift_curve`] for `s = Π_c s_c^{w_c}` given the factors
/// `s_c`: each factor is unwrapped on its own, so steps of the product
/// phase of 2π or more (from large weights) are never aliased.
pub fn spectral_shift_curve_factored(
    sample: &(dyn Fn(f64) -> Result<Vec<LogDet>> + Sync),
    weights: &[f64],
    lambdas: &[f64],
    max_refine: usize,
) -> Result<Vec<ShiftPoint>> {
    for &l in lambdas {
        check_real_energy(l)?;
    }
    let nc = weights.len();
    let checked = |l: f64| -> Result<Vec<LogDet>> {
        let v = sample(l)?;
        if v.len() != nc {
            return Err(Error::ValidationError(format!("expected {nc} factors, got {}", v.len())));
        }
        Ok(v)
    };
    let mut out = Vec::new();
    for positive in [false, true] {
        let mut xs: Vec<f64> = lambdas.iter().copied().filter(|l| (*l > 0.0) == positive).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.is_empty() {
            continue;
        }
        let mut vals = map_samples(&checked, &xs)?;
        let mut round = 0;
        loop {
            let bad: Vec<usize> = (0..xs.len().saturating_sub(1))
                .filter(|&k| (0..nc).any(|c| wrap_angle(vals[k + 1][c].arg - vals[k][c].arg).abs() >= MAX_SHIFT_STEP))
                .collect();
            if bad.is_empty() {
                break;
            }
            if round == max_refine {
                return Err(Error::PhaseUnresolved(Complex64::new(xs[bad[0]], 0.0)));
            }
            round += 1;
            let mids: Vec<f64> = bad.iter().map(|&k| 0.5 * (xs[k] + xs[k + 1])).collect();
            let mv = map_samples(&checked, &mids)?;
            let mut merged: Vec<(f64, Vec<LogDet>)> = xs.into_iter().zip(vals).chain(mids.into_iter().zip(mv)).collect();
            merged.sort_by(|a, b| a.0.total_cmp(&b.0));
            (xs, vals) = merged.into_iter().unzip();
        }
        let mut phase = vec![0.0; xs.len()];
        for c in 0..nc {
            let mut acc = vals[0][c].arg;
            phase[0] += weights[c] * acc;
            for k in 1..xs.len() {
                acc += wrap_angle(vals[k][c].arg - vals[k - 1][c].arg);
                phase[k] += weights[c] * acc;
            }
        }
        // anchor at the sample farthest from the thresholds
        let far = if positive { xs.len() - 1 } else { 0 };
        let xi_far = -phase[far] / (2.0 * PI);
        let shift = -(xi_far - 0.5).ceil();
        for k in 0..xs.len() {
            let log_abs = (0..nc).map(|c| weights[c] * vals[k][c].log_abs).sum();
            let s = LogDet { log_abs, arg: wrap_angle(phase[k]) };
            out.push(ShiftPoint { lambda: xs[k], xi: -phase[k] / (2.0 * PI) + shift, s: s.into() });
        }
    }
    Ok(out)
}

fn map_samples<T: Send>(sample: &(dyn Fn(f64) -> Result<T> + Sync), xs: &[f64]) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        xs.par_iter().map(|&x| sample(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().map(|&x| sample(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchoring_puts_far_samples_near_zero() {
        // s = exp(-2 pi i xi) with xi = 3 + 1/lambda^2 on both half-lines
        let f = |l: f64| Ok(LogDet { log_abs: 0.0, arg: wrap_angle(-2.0 * PI * (3.0 + 1.0 / (l * l))) });
        let grid: Vec<f64> = (0..40).map(|k| 1.1 + 0.3 * k as f64).chain((0..40).map(|k| -1.1 - 0.3 * k as f64)).collect();
        let c = spectral_shift_curve(&f, &grid, 4).unwrap();
        assert!(c.len() >= 80);
        for p in &c {
            assert!((p.xi - 1.0 / (p.lambda * p.lambda)).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn refinement_resolves_fast_phase() {
        // xi = 2 lambda: coarse samples step the phase by 2 pi * 0.4
        let f = |l: f64| Ok(LogDet { log_abs: 0.0, arg: wrap_angle(-2.0 * PI * 2.0 * l) });
        let grid: Vec<f64> = (0..11).map(|k| 1.5 + 0.2 * k as f64).collect();
        let c = spectral_shift_curve(&f, &grid, 3).unwrap();
        assert!(c.len() > 11);
        for w in c.windows(2) {
            assert!(((w[1].xi - w[0].xi) - 2.0 * (w[1].lambda - w[0].lambda)).abs() < 1e-9);
        }
        assert!(matches!(spectral_shift_curve(&f, &grid, 0), Err(Error::PhaseUnresolved(_))));
    }

    #[test]
    fn thresholds_rejected() {
        let f = |_l: f64| Ok(LogDet::ONE);
        assert!(matches!(spectral_shift_curve(&f, &[1.0005, 2.0], 1), Err(Error::BranchPoint(_))));
    }
}
