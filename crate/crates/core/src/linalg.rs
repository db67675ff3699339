//! Thin layer over `faer`: LU with partial pivoting kept in packed form,
//! log-determinants, solves and a power-iteration spectral norm.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::factor::{lu_in_place, lu_in_place_scratch};
use faer::linalg::triangular_solve::{solve_unit_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, MatMut, MatRef, Par};
use num_complex::Complex64;
use std::f64::consts::PI;

/// A complex number stored as `exp(log_abs + i arg)`, for determinants whose
/// modulus leaves the floating-point range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    /// Argument reduced to `(-pi, pi]`.
    pub arg: f64,
}

impl LogDet {
    pub const ONE: LogDet = LogDet { log_abs: 0.0, arg: 0.0 };

    pub fn from_complex(z: Complex64) -> Self {
        LogDet { log_abs: z.norm().ln(), arg: z.arg() }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_abs.exp(), self.arg)
    }

    pub fn abs(self) -> f64 {
        self.log_abs.exp()
    }

    pub fn mul(self, o: LogDet) -> LogDet {
        LogDet { log_abs: self.log_abs + o.log_abs, arg: wrap_angle(self.arg + o.arg) }
    }

    pub fn div(self, o: LogDet) -> LogDet {
        LogDet { log_abs: self.log_abs - o.log_abs, arg: wrap_angle(self.arg - o.arg) }
    }

    /// `log z` on the principal branch.
    pub fn ln(self) -> Complex64 {
        Complex64::new(self.log_abs, self.arg)
    }
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

pub(crate) fn par() -> Par {
    #[cfg(feature = "parallel")]
    {
        let n = rayon::current_num_threads();
        if n > 1 {
            return Par::rayon(n);
        }
    }
    Par::Seq
}

/// Packed LU factorisation `P A = L U` of a square matrix.
pub struct LuFactor {
    lu: Mat<Complex64>,
    fwd: Vec<usize>,
    transpositions: usize,
}

impl LuFactor {
    /// Factor `a` in place (the matrix is consumed, no copy is made).
    pub fn new(mut a: Mat<Complex64>) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "LU of a non-square matrix");
        let n = a.nrows();
        let mut fwd = vec![0usize; n];
        let mut bwd = vec![0usize; n];
        let p = par();
        let mut buf = MemBuffer::new(lu_in_place_scratch::<usize, Complex64>(n, n, p, Default::default()));
        let (info, _) = lu_in_place(a.as_mut(), &mut fwd, &mut bwd, p, MemStack::new(&mut buf), Default::default());
        LuFactor { lu: a, fwd, transpositions: info.transposition_count }
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn log_det(&self) -> LogDet {
        let mut log_abs = 0.0;
        let mut arg = if self.transpositions % 2 == 1 { PI } else { 0.0 };
        for i in 0..self.dim() {
            let u = self.lu[(i, i)];
            log_abs += u.norm().ln();
            arg += u.arg();
        }
        LogDet { log_abs, arg: wrap_angle(arg) }
    }

    /// `max |U_ii| / min |U_ii|`, a cheap lower bound for the condition number.
    pub fn pivot_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..self.dim() {
            let u = self.lu[(i, i)].norm();
            lo = lo.min(u);
            hi = hi.max(u);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Overwrite `rhs` with `A^{-1} rhs`.
    pub fn solve_in_place(&self, mut rhs: MatMut<'_, Complex64>) {
        let n = self.dim();
        assert_eq!(rhs.nrows(), n);
        let src = rhs.to_owned();
        for j in 0..rhs.ncols() {
            for i in 0..n {
                rhs[(i, j)] = src[(self.fwd[i], j)];
            }
        }
        let p = par();
        solve_unit_lower_triangular_in_place(self.lu.as_ref(), rhs.as_mut(), p);
        solve_upper_triangular_in_place(self.lu.as_ref(), rhs.as_mut(), p);
    }
}

/// `log det(A)` by LU with partial pivoting.
pub fn log_det(a: Mat<Complex64>) -> LogDet {
    if a.nrows() == 0 {
        return LogDet::ONE;
    }
    LuFactor::new(a).log_det()
}

/// Largest singular value by power iteration on `A^* A`, started from a
/// deterministic vector; stops when successive estimates agree to `rtol`.
pub fn largest_singular_value(a: MatRef<'_, Complex64>, rtol: f64, max_iter: usize) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut v = Mat::<Complex64>::from_fn(n, 1, |i, _| {
        // fixed, non-symmetric start vector
        let t = i as f64;
        Complex64::new(1.0 + 0.5 * (0.7 * t).sin(), 0.3 * (1.3 * t).cos())
    });
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let nv = v.norm_l2();
        if nv == 0.0 {
            return 0.0;
        }
        let inv = 1.0 / nv;
        for i in 0..n {
            v[(i, 0)] *= inv;
        }
        let av = a * &v;
        let next = av.norm_l2();
        if next == 0.0 {
            return 0.0;
        }
        v = a.adjoint() * &av;
        if (next - sigma).abs() <= rtol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}
