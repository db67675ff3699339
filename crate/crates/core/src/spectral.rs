//! Spectral parameter together with the sheet on which the momentum
//! `kappa = sqrt(lambda^2 - 1)` is continued.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Riemann sheet of `kappa(lambda)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    /// `Im kappa >= 0`: the resolvent is bounded on L^2.
    Physical,
    /// The continuation through the continuous spectrum, `kappa -> -kappa`.
    Second,
}

impl Sheet {
    pub fn other(self) -> Sheet {
        match self {
            Sheet::Physical => Sheet::Second,
            Sheet::Second => Sheet::Physical,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sheet::Physical => "physical",
            Sheet::Second => "second",
        }
    }
}

/// Distance from `+-1` below which `lambda` counts as a branch point.
pub const BRANCH_POINT_TOL: f64 = 1e-13;

/// A point `lambda` on a chosen sheet with its momentum `kappa`.
///
/// A real `lambda` with `|lambda| > 1` is read as the boundary value from
/// the upper half plane, `lambda + i0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParameter {
    pub lambda: Complex64,
    pub sheet: Sheet,
    pub kappa: Complex64,
}

impl SpectralParameter {
    pub fn new(lambda: Complex64, sheet: Sheet) -> Result<Self> {
        let kappa_phys = physical_kappa(lambda)?;
        let kappa = match sheet {
            Sheet::Physical => kappa_phys,
            Sheet::Second => -kappa_phys,
        };
        Ok(SpectralParameter { lambda, sheet, kappa })
    }

    pub fn real(lambda: f64, sheet: Sheet) -> Result<Self> {
        Self::new(Complex64::new(lambda, 0.0), sheet)
    }

    /// The same `lambda` continued on the other sheet.
    pub fn flipped(&self) -> Self {
        SpectralParameter {
            lambda: self.lambda,
            sheet: self.sheet.other(),
            kappa: -self.kappa,
        }
    }
}

/// `i * psqrt(1 - lambda^2)`, with the real axis outside `[-1, 1]` taken as
/// the limit from above.
pub fn physical_kappa(lambda: Complex64) -> Result<Complex64> {
    if (lambda - 1.0).norm() < BRANCH_POINT_TOL || (lambda + 1.0).norm() < BRANCH_POINT_TOL {
        return Err(Error::BranchPoint(lambda));
    }
    if lambda.im == 0.0 {
        let l = lambda.re;
        return Ok(if l.abs() < 1.0 {
            Complex64::new(0.0, (1.0 - l * l).sqrt())
        } else {
            // 1 - (l + i0)^2 has imaginary part -sign(l) * 0, so the root is
            // -i sign(l) sqrt(l^2 - 1) and kappa = sign(l) sqrt(l^2 - 1).
            Complex64::new(l.signum() * (l * l - 1.0).sqrt(), 0.0)
        });
    }
    let w = Complex64::new(1.0, 0.0) - lambda * lambda;
    Ok(Complex64::i() * w.sqrt())
}
