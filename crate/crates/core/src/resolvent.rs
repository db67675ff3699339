//! Closed-form kernels of the free resolvent on both sheets, the cutoff
//! profile and the far-field kernel of the spectral representation.

use crate::dirac::{algebra, alpha_dot_real, symbol_d0_complex, Mat4};
use crate::error::{Error, Result};
use crate::spectral::SpectralParameter;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Separation below which kernels refuse to evaluate.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Radial cutoff: one on `|x| <= R0`, zero on `|x| >= R0 + margin`, joined by
/// the quintic smoothstep (C^2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    pub r0: f64,
    pub margin: f64,
}

impl CutoffProfile {
    pub fn new(r0: f64, margin: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::NonPositiveRadius(r0));
        }
        if !(margin > 0.0) {
            return Err(Error::ValidationError(format!("cutoff margin must be positive, got {margin}")));
        }
        Ok(CutoffProfile { r0, margin })
    }

    /// Default margin `0.25 R0`.
    pub fn with_default_margin(r0: f64) -> Result<Self> {
        Self::new(r0, 0.25 * r0)
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        if r <= self.r0 {
            return 1.0;
        }
        if r >= self.r0 + self.margin {
            return 0.0;
        }
        let s = (r - self.r0) / self.margin;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.eval_radial(norm3(x))
    }
}

pub(crate) fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn diff(x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

/// `exp(i kappa |x - y|) / (4 pi |x - y|)`.
pub fn helmholtz_kernel(sp: &SpectralParameter, x: [f64; 3], y: [f64; 3]) -> Result<Complex64> {
    let r = norm3(diff(x, y));
    if r < COINCIDENCE_TOL {
        return Err(Error::CoincidentPoints);
    }
    Ok((Complex64::i() * sp.kappa * r).exp() / (4.0 * PI * r))
}

/// Scalar factors of the Dirac kernel at separation `r > 0`:
/// `R0(lambda, r) = A(r) alpha.rhat + B(r) (beta + lambda)` with
/// `B = e^{i kappa r}/(4 pi r)` and `A = (i/r + kappa) B`.
#[inline]
pub fn dirac_kernel_factors(kappa: Complex64, r: f64) -> (Complex64, Complex64) {
    let b = (Complex64::i() * kappa * r).exp() / (4.0 * PI * r);
    let a = (Complex64::new(0.0, 1.0 / r) + kappa) * b;
    (a, b)
}

/// `(i alpha.r/|r|^2 + kappa alpha.r/|r| + beta + lambda) e^{i kappa |r|}/(4 pi |r|)`, `r = x - y`.
pub fn dirac_resolvent_kernel(sp: &SpectralParameter, x: [f64; 3], y: [f64; 3]) -> Result<Mat4> {
    let d = diff(x, y);
    let r = norm3(d);
    if r < COINCIDENCE_TOL {
        return Err(Error::CoincidentPoints);
    }
    let (a, b) = dirac_kernel_factors(sp.kappa, r);
    let rhat = d.map(|c| c / r);
    Ok(alpha_dot_real(rhat) * a + beta_plus(sp.lambda) * b)
}

/// `beta + lambda I`.
pub fn beta_plus(lambda: Complex64) -> Mat4 {
    let mut m = algebra().beta;
    for i in 0..4 {
        m.0[i][i] += lambda;
    }
    m
}

/// Prefactor `c` of the far-field kernel, `c^2 = lambda kappa`, taken as the
/// principal root of `lambda kappa`. On `(1, inf) + i0` it is the positive
/// fourth root of `lambda^2 (lambda^2 - 1)`.
pub fn farfield_prefactor(sp: &SpectralParameter) -> Result<Complex64> {
    if sp.lambda.norm() < crate::spectral::BRANCH_POINT_TOL {
        return Err(Error::BranchPoint(sp.lambda));
    }
    Ok((sp.lambda * sp.kappa).sqrt())
}

/// The projector in the far-field kernel, `(I + d0(kappa omega)/lambda)/2`.
///
/// Since `d0(kappa omega)^2 = lambda^2`, this is the spectral projector of
/// `d0(kappa omega)` onto the eigenvalue `lambda`, i.e. `Pi_+` for
/// `lambda` near `(1, inf)` and `Pi_-` near `(-inf, -1)`.
pub fn farfield_projector(sp: &SpectralParameter, omega: [f64; 3]) -> Mat4 {
    let zeta = omega.map(|c| sp.kappa * c);
    (Mat4::identity() + symbol_d0_complex(zeta) * (1.0 / sp.lambda)) * 0.5
}

/// `(2 pi)^{-3/2} c Pi(kappa omega) e^{-i kappa omega.x} chi(x)`.
pub fn farfield_kernel(
    sp: &SpectralParameter,
    omega: [f64; 3],
    x: [f64; 3],
    chi: &CutoffProfile,
) -> Result<Mat4> {
    let c = farfield_prefactor(sp)?;
    let cx = chi.eval(x);
    if cx == 0.0 {
        return Ok(Mat4::zero());
    }
    let phase = (-Complex64::i() * sp.kappa * dot(omega, x)).exp();
    let s = c * phase * cx * (2.0 * PI).powf(-1.5);
    Ok(farfield_projector(sp, omega) * s)
}

/// Kernel of the continued adjoint `E(conj lambda)^*`:
/// `(2 pi)^{-3/2} c chi(x) e^{i kappa omega.x} Pi(kappa omega)`.
pub fn farfield_adjoint_kernel(
    sp: &SpectralParameter,
    x: [f64; 3],
    omega: [f64; 3],
    chi: &CutoffProfile,
) -> Result<Mat4> {
    let c = farfield_prefactor(sp)?;
    let cx = chi.eval(x);
    if cx == 0.0 {
        return Ok(Mat4::zero());
    }
    let phase = (Complex64::i() * sp.kappa * dot(omega, x)).exp();
    let s = c * phase * cx * (2.0 * PI).powf(-1.5);
    Ok(farfield_projector(sp, omega) * s)
}

/// Smooth kernel `R0(lambda) - R0~(lambda)` (physical minus second sheet)
/// as `a(r) (beta + lambda) + b(r) alpha.rhat` with
/// `a = i kappa j0(kappa r)/(2 pi)` and `b = -kappa^2 j1(kappa r)/(2 pi)`.
pub fn sheet_jump_factors(kappa: Complex64, r: f64) -> (Complex64, Complex64) {
    let z = kappa * r;
    let (j0, j1) = if z.norm() < 1e-3 {
        let z2 = z * z;
        (
            Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0,
            z / 3.0 - z * z2 / 30.0 + z * z2 * z2 / 840.0,
        )
    } else {
        let (s, c) = (z.sin(), z.cos());
        (s / z, s / (z * z) - c / z)
    };
    let a = Complex64::i() * kappa * j0 / (2.0 * PI);
    let b = -kappa * kappa * j1 / (2.0 * PI);
    (a, b)
}

/// Full matrix form of the sheet jump at `r = x - y` (finite at `r = 0`).
pub fn sheet_jump_kernel(sp: &SpectralParameter, x: [f64; 3], y: [f64; 3]) -> Mat4 {
    let d = diff(x, y);
    let r = norm3(d);
    let (a, b) = sheet_jump_factors(sp.kappa, r);
    let mut m = beta_plus(sp.lambda) * a;
    if r > 0.0 {
        m += alpha_dot_real(d.map(|c| c / r)) * b;
    }
    m
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
