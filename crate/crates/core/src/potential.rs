//! Smooth compactly supported Hermitian matrix potentials.

use crate::dirac::{algebra, Mat4};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Flat radial bump `p(r) = exp(1 - 1/(1 - (r/R0)^2))` for `r < R0`, zero beyond.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpProfile {
    pub r0: f64,
}

pub fn make_bump_profile(r0: f64) -> Result<BumpProfile> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::NonPositiveRadius(r0));
    }
    Ok(BumpProfile { r0 })
}

impl BumpProfile {
    pub fn eval(&self, r: f64) -> f64 {
        let s = r / self.r0;
        let q = 1.0 - s * s;
        if q <= 0.0 {
            return 0.0;
        }
        (1.0 - 1.0 / q).exp()
    }
}

/// Matrix structure of the potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// `V = g p(|x|) I`
    ElectricI4,
    /// `V = g p(|x|) beta`
    ScalarBeta,
    /// `V = g p(|x|) M` with a fixed Hermitian `M`
    CustomHermitian,
}

/// `V(x) = g p(|x|) M` with `M` determined by the channel.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPotential {
    pub profile: BumpProfile,
    pub channel: Channel,
    pub g: f64,
    /// The constant Hermitian factor, `I`, `beta` or the custom matrix.
    pub matrix: Mat4,
}

impl MatrixPotential {
    pub fn electric(g: f64, r0: f64) -> Result<Self> {
        Ok(MatrixPotential {
            profile: make_bump_profile(r0)?,
            channel: Channel::ElectricI4,
            g,
            matrix: Mat4::identity(),
        })
    }

    pub fn scalar_beta(g: f64, r0: f64) -> Result<Self> {
        Ok(MatrixPotential {
            profile: make_bump_profile(r0)?,
            channel: Channel::ScalarBeta,
            g,
            matrix: algebra().beta,
        })
    }

    /// Custom channel; `m` must be Hermitian to `1e-12`.
    pub fn custom(g: f64, r0: f64, m: Mat4) -> Result<Self> {
        let defect = (m - m.adjoint()).max_abs();
        if defect > 1e-12 {
            return Err(Error::ValidationError(format!(
                "custom matrix is not Hermitian: max |M - M*| = {defect:.3e}"
            )));
        }
        // Keep the stored factor exactly Hermitian.
        let m = (m + m.adjoint()) * 0.5;
        Ok(MatrixPotential {
            profile: make_bump_profile(r0)?,
            channel: Channel::CustomHermitian,
            g,
            matrix: m,
        })
    }

    pub fn r0(&self) -> f64 {
        self.profile.r0
    }

    /// Scalar radial factor `g p(r)`.
    pub fn radial(&self, r: f64) -> f64 {
        self.g * self.profile.eval(r)
    }

    /// Same potential with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        MatrixPotential { g: self.g * factor, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.g == 0.0
    }

    /// Stable 64-bit fingerprint of the defining parameters.
    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::hash::Fnv::new();
        h.write_str("potential");
        h.write_u64(self.channel as u64);
        h.write_f64(self.g);
        h.write_f64(self.profile.r0);
        for z in self.matrix.0.iter().flatten() {
            h.write_f64(z.re);
            h.write_f64(z.im);
        }
        h.finish()
    }
}

/// Value of the potential at `x`.
pub fn sample_potential(v: &MatrixPotential, x: [f64; 3]) -> Mat4 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let s = v.radial(r);
    if s == 0.0 {
        return Mat4::zero();
    }
    v.matrix * Complex64::new(s, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let p = make_bump_profile(1.0).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(1.0), 0.0);
        assert_eq!(p.eval(1.5), 0.0);
        assert!((p.eval(0.5f64.sqrt()) - (-1.0f64).exp()).abs() < 1e-15);
        assert!(matches!(make_bump_profile(0.0), Err(Error::NonPositiveRadius(_))));
        assert!(matches!(make_bump_profile(-1.0), Err(Error::NonPositiveRadius(_))));
    }

    #[test]
    fn bump_is_flat_at_edge() {
        let p = make_bump_profile(1.0).unwrap();
        let r = 1.0 - 1e-3;
        let h = 1e-6;
        let d = (p.eval(r + h) - p.eval(r - h)) / (2.0 * h);
        assert!(p.eval(r) <= 1e-8);
        assert!(d.abs() <= 1e-8);
    }

    #[test]
    fn electric_at_origin() {
        let v = MatrixPotential::electric(2.0, 1.0).unwrap();
        assert_eq!(sample_potential(&v, [0.0; 3]), Mat4::identity() * 2.0);
        assert_eq!(sample_potential(&v, [0.0, 1.0, 0.0]), Mat4::zero());
    }

    #[test]
    fn custom_rejects_non_hermitian() {
        let mut m = Mat4::identity();
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(MatrixPotential::custom(1.0, 1.0, m), Err(Error::ValidationError(_))));
    }
}
