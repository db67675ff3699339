//! Identity checks with residuals: Dirac algebra, projectors, the
//! Foldy–Wouthuysen conjugation, the resolvent kernel against finite
//! differences, the sheet-jump identity, unitarity and the reciprocal
//! identity of the scattering determinant.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dirac::{algebra, bracket, fw_transform, projector, symbol_d0, Branch, Mat4};
use crate::error::Result;
use crate::quadrature::{SphereQuadrature, VolumeQuadrature};
use crate::resolvent::{dirac_resolvent_kernel, helmholtz_kernel, CutoffProfile};
use crate::scattering::{scattering_determinant, scattering_matrix, scattering_matrix_continued, sheet_jump_residual, ScatteringSetup};
use crate::spectral::{Sheet, SpectralParameter};

/// Finite-difference step of the kernel check.
pub const KERNEL_FD_STEP: f64 = 1e-4;

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        CheckResult { name: name.to_string(), residual, tolerance, pass: residual <= tolerance }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 3] {
    [rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)]
}

/// `{alpha_j, alpha_k} = 2 delta_jk`, `{alpha_j, beta} = 0`, `beta^2 = I`;
/// the residual is the largest entry defect (exactly zero in floating point).
pub fn check_anticommutation() -> CheckResult {
    let a = algebra();
    let id = Mat4::identity();
    let mut worst: f64 = (a.beta * a.beta - id).max_abs();
    for j in 0..3 {
        worst = worst.max((a.alpha[j] * a.beta + a.beta * a.alpha[j]).max_abs());
        for k in 0..3 {
            let expect = if j == k { id * 2.0 } else { Mat4::zero() };
            worst = worst.max((a.alpha[j] * a.alpha[k] + a.alpha[k] * a.alpha[j] - expect).max_abs());
        }
    }
    CheckResult::new("anticommutation", worst, 0.0)
}

/// `Π±² = Π±`, `Π+ Π- = 0`, `Π+ + Π- = I`, `d0 Π± = ±<ξ> Π±` at `n` seeded
/// random momenta.
pub fn check_projectors(seed: u64, n: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let xi = random_vector(&mut rng, 5.0);
        let (p, m) = (projector(xi, Branch::Plus), projector(xi, Branch::Minus));
        let d = symbol_d0(xi);
        let b = bracket(xi);
        worst = worst
            .max((p * p - p).max_abs())
            .max((m * m - m).max_abs())
            .max((p * m).max_abs())
            .max((p + m - Mat4::identity()).max_abs())
            .max((d * p - p * b).max_abs() / b)
            .max((d * m + m * b).max_abs() / b);
    }
    CheckResult::new("projectors", worst, 1e-12)
}

/// `Ĝ(ξ) d0(ξ) Ĝ(ξ)^{-1} = <ξ> β` at `n` seeded random momenta, relative to `<ξ>`.
pub fn check_fw_conjugation(seed: u64, n: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = algebra().beta;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let xi = random_vector(&mut rng, 10.0);
        let g = fw_transform(xi);
        let lhs = g * symbol_d0(xi) * g.adjoint();
        let b = bracket(xi);
        worst = worst.max((lhs - beta * b).max_abs() / b);
        worst = worst.max((g * g.adjoint() - Mat4::identity()).max_abs());
    }
    CheckResult::new("fw_conjugation", worst, 1e-10)
}

/// Closed-form Dirac resolvent kernel against `(-i alpha.grad_x + beta + lambda)`
/// applied to the Helmholtz kernel by centred differences, at `n` seeded
/// `(x, y, lambda)` triples; relative Frobenius error.
pub fn check_kernel_fd(seed: u64, n: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < n {
        let x = random_vector(&mut rng, 1.0);
        let y = random_vector(&mut rng, 1.0);
        let r: f64 = (0..3).map(|j| (x[j] - y[j]).powi(2)).sum::<f64>().sqrt();
        if r < 0.2 {
            continue;
        }
        let lambda = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..2.0));
        let sheet = if rng.gen_bool(0.5) { Sheet::Physical } else { Sheet::Second };
        let sp = SpectralParameter::new(lambda, sheet)?;
        let exact = dirac_resolvent_kernel(&sp, x, y)?;
        let g = helmholtz_kernel(&sp, x, y)?;
        let mut grad = [Complex64::new(0.0, 0.0); 3];
        for (j, gj) in grad.iter_mut().enumerate() {
            let (mut xp, mut xm) = (x, x);
            xp[j] += KERNEL_FD_STEP;
            xm[j] -= KERNEL_FD_STEP;
            *gj = (helmholtz_kernel(&sp, xp, y)? - helmholtz_kernel(&sp, xm, y)?) / (2.0 * KERNEL_FD_STEP);
        }
        let a = algebra();
        let mut fd = Mat4::zero();
        for j in 0..3 {
            fd = fd + a.alpha[j] * (-Complex64::i() * grad[j]);
        }
        fd = fd + (a.beta + Mat4::identity() * lambda) * g;
        worst = worst.max((fd - exact).norm() / exact.norm());
        done += 1;
    }
    Ok(CheckResult::new("kernel_fd", worst, 1e-6))
}

/// Relative operator-norm residual of the sheet-jump identity at `lambda`.
pub fn check_sheet_jump(
    lambda: Complex64,
    quad: &VolumeQuadrature,
    chi: &CutoffProfile,
    sphere: &SphereQuadrature,
) -> Result<CheckResult> {
    let sp = SpectralParameter::new(lambda, Sheet::Physical)?;
    let j = sheet_jump_residual(&sp, quad, chi, sphere)?;
    Ok(CheckResult::new(&format!("sheet_jump({lambda})"), j.residual, 1e-6))
}

/// `||S S* - I||` at a real energy.
pub fn check_unitarity(lambda: f64, setup: &ScatteringSetup<'_>) -> Result<CheckResult> {
    let s = scattering_matrix(lambda, setup)?;
    Ok(CheckResult::new(&format!("unitarity({lambda})"), s.unitarity_residual, 1e-4))
}

/// `|s(z) conj(s(conj z)) - 1|` at a non-real `z`.
pub fn check_reciprocity(z: Complex64, setup: &ScatteringSetup<'_>) -> Result<CheckResult> {
    let a = scattering_determinant(&scattering_matrix_continued(z, setup)?);
    let b = scattering_determinant(&scattering_matrix_continued(z.conj(), setup)?);
    Ok(CheckResult::new(&format!("reciprocity({z})"), (a * b.conj() - 1.0).norm(), 1e-4))
}
