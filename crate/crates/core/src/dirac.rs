//! Dirac matrices, the free symbol and its spectral projectors, and the
//! unitary transform that block-diagonalises the symbol.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

/// Dense 4x4 complex matrix acting on Dirac spinors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[Complex64; 4]; 4]);

/// Complex Dirac spinor.
pub type Spinor = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 4])
    }

    pub fn diag(d: [Complex64; 4]) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let mut out = [ZERO; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.0[i][j] * v[j];
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, o: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] + o.0[i][j])
    }
}

impl AddAssign for Mat4 {
    fn add_assign(&mut self, o: Mat4) {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, o: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] - o.0[i][j])
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        Mat4::from_fn(|i, j| -self.0[i][j])
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, o: Mat4) -> Mat4 {
        let mut m = Mat4::zero();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..4 {
                    m.0[i][j] += a * o.0[k][j];
                }
            }
        }
        m
    }
}

impl Mul<Complex64> for Mat4 {
    type Output = Mat4;
    fn mul(self, s: Complex64) -> Mat4 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat4 {
    type Output = Mat4;
    fn mul(self, s: f64) -> Mat4 {
        self.scale(Complex64::new(s, 0.0))
    }
}

/// The four Dirac matrices in the standard representation.
#[derive(Clone, Copy, Debug)]
pub struct DiracAlgebra {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
}

/// Standard representation: `beta = diag(1, 1, -1, -1)` and `alpha_j` carries
/// the Pauli matrix `sigma_j` in both off-diagonal 2x2 blocks.
pub fn dirac_matrices() -> DiracAlgebra {
    let pauli: [[[Complex64; 2]; 2]; 3] = [
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ];
    let alpha = pauli.map(|s| {
        let mut m = Mat4::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j + 2] = s[i][j];
                m.0[i + 2][j] = s[i][j];
            }
        }
        m
    });
    let beta = Mat4::diag([ONE, ONE, -ONE, -ONE]);
    DiracAlgebra { alpha, beta }
}

thread_local! {
    static ALGEBRA: DiracAlgebra = dirac_matrices();
}

/// Cached copy of [`dirac_matrices`].
pub fn algebra() -> DiracAlgebra {
    ALGEBRA.with(|a| *a)
}

/// `alpha . v` for a complex 3-vector, written out entry by entry.
pub fn alpha_dot(v: [Complex64; 3]) -> Mat4 {
    let [x, y, z] = v;
    let mut m = Mat4::zero();
    // sigma . v block
    let s = [[z, x - I * y], [x + I * y, -z]];
    for i in 0..2 {
        for j in 0..2 {
            m.0[i][j + 2] = s[i][j];
            m.0[i + 2][j] = s[i][j];
        }
    }
    m
}

/// `alpha . v` for a real 3-vector.
pub fn alpha_dot_real(v: [f64; 3]) -> Mat4 {
    alpha_dot(v.map(|c| Complex64::new(c, 0.0)))
}

/// Free symbol `d0(xi) = alpha . xi + beta`.
pub fn symbol_d0(xi: [f64; 3]) -> Mat4 {
    symbol_d0_complex(xi.map(|c| Complex64::new(c, 0.0)))
}

/// Free symbol at a complex momentum.
pub fn symbol_d0_complex(zeta: [Complex64; 3]) -> Mat4 {
    let mut m = alpha_dot(zeta);
    m.0[0][0] += ONE;
    m.0[1][1] += ONE;
    m.0[2][2] -= ONE;
    m.0[3][3] -= ONE;
    m
}

/// Japanese bracket `<xi> = sqrt(1 + |xi|^2)`.
pub fn bracket(xi: [f64; 3]) -> f64 {
    (1.0 + xi.iter().map(|c| c * c).sum::<f64>()).sqrt()
}

/// Which eigenvalue branch `+<xi>` or `-<xi>` a projector selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Spectral projector of `d0(xi)` onto the eigenvalue `sign * <xi>`.
pub fn projector(xi: [f64; 3], branch: Branch) -> Mat4 {
    let d = symbol_d0(xi);
    let s = branch.sign() / bracket(xi);
    (Mat4::identity() + d * s) * 0.5
}

/// Projector of `d0(zeta)` for complex `zeta`, using `<zeta> = sqrt(1 + zeta.zeta)`
/// with the principal square root.
pub fn projector_complex(zeta: [Complex64; 3], branch: Branch) -> Mat4 {
    let d = symbol_d0_complex(zeta);
    let q: Complex64 = zeta.iter().map(|c| c * c).sum::<Complex64>() + ONE;
    let s = Complex64::new(branch.sign(), 0.0) / q.sqrt();
    (Mat4::identity() + d * s) * 0.5
}

/// Unitary transform `exp(beta (alpha . xi) theta(|xi|))` with
/// `theta(t) = arctan(t) / (2t)`.
///
/// Since `(beta alpha.xi)^2 = -|xi|^2`, the exponential has the closed form
/// `cos(phi/2) + sin(phi/2) beta alpha.xi / |xi|` with `phi = arctan |xi|`.
pub fn fw_transform(xi: [f64; 3]) -> Mat4 {
    let t = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
    if t == 0.0 {
        return Mat4::identity();
    }
    let half = 0.5 * t.atan();
    let unit = xi.map(|c| c / t);
    let ba = algebra().beta * alpha_dot_real(unit);
    Mat4::identity() * half.cos() + ba * half.sin()
}

/// `theta(t) = arctan(t) / (2t)`, continued by `1/2` at the origin.
pub fn fw_angle(t: f64) -> f64 {
    if t == 0.0 {
        0.5
    } else {
        t.atan() / (2.0 * t)
    }
}
