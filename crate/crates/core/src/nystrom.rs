//! Nyström discretisation of the Birman–Schwinger operator
//! `K(lambda) = V R0(lambda) chi` and its Fredholm determinants.
//!
//! Off-diagonal blocks use point evaluation of the kernel. The singular part
//! of the kernel,
//! `(beta + lambda)/(4 pi r) + i alpha.r/(4 pi r^3) + (i kappa^2/8pi) alpha.rhat - (kappa^2/8pi)(beta + lambda) r`
//! `- (i kappa^4/32pi) r alpha.r + (kappa^4/96pi)(beta + lambda) r^3`,
//! is corrected on neighbouring cells with the precomputed integrals of
//! [`crate::singular`]; the smooth remainder is evaluated pointwise (its
//! diagonal value is `(beta + lambda) i kappa/(4 pi)`).
//!
//! Since `chi V = V`, `det(I + K)` equals the determinant of the block of
//! `K` on the nodes where `V` does not vanish, so only those nodes are
//! assembled.

use crate::cache::DetCache;
use crate::dirac::{algebra, Mat4};
use crate::error::{Error, Result};
use crate::linalg::{largest_singular_value, log_det, LogDet, LuFactor};
use crate::potential::{sample_potential, Channel, MatrixPotential};
use crate::quadrature::VolumeQuadrature;
use crate::resolvent::{beta_plus, dirac_kernel_factors, norm3, CutoffProfile};
use crate::search::DetFn;
use crate::singular::{correction_table, model_kernels, N_KERNELS};
use crate::spectral::{Sheet, SpectralParameter};
use faer::Mat;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest matrix dimension `4N` the assembler accepts.
pub const MAX_DIMENSION: usize = 40_000;

/// Grid data shared by all assemblies for one potential support and one
/// volume quadrature.
#[derive(Clone, Debug)]
pub struct NystromGrid {
    pub quad: Arc<VolumeQuadrature>,
    pub chi: CutoffProfile,
    /// Quadrature nodes inside the potential's support.
    pub active: Vec<usize>,
    /// Correction sums per active row: `(active column, [C_k])`.
    near: Vec<Vec<(usize, [f64; N_KERNELS])>>,
}

impl NystromGrid {
    /// Prepare the grid for potentials supported in `|x| < support_radius`.
    pub fn new(quad: Arc<VolumeQuadrature>, chi: CutoffProfile, support_radius: f64) -> Self {
        let active: Vec<usize> = (0..quad.len()).filter(|&i| norm3(quad.nodes[i]) < support_radius).collect();
        let mut position = vec![usize::MAX; quad.len()];
        for (k, &i) in active.iter().enumerate() {
            position[i] = k;
        }
        let table = correction_table(quad.gauss_order);
        let m = quad.nodes_per_cell();
        let h = quad.h;
        let near = active
            .iter()
            .map(|&i| {
                let (ci, a) = quad.locate(i);
                let c = quad.cells[ci];
                let wi = quad.weights[i];
                let mut row = Vec::new();
                for oz in -1..=1 {
                    for oy in -1..=1 {
                        for ox in -1..=1 {
                            let o = [ox, oy, oz];
                            let Some(cj) = quad.cell_at([c[0] + ox, c[1] + oy, c[2] + oz]) else {
                                continue;
                            };
                            for b in 0..m {
                                let j = cj * m + b;
                                let pj = position[j];
                                if pj == usize::MAX {
                                    continue;
                                }
                                let t = table.get(o, a, b, h);
                                let mut corr = t.map(|v| v / wi);
                                if j != i {
                                    let xi = quad.nodes[i];
                                    let xj = quad.nodes[j];
                                    let k = model_kernels([xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]]);
                                    let wj = quad.weights[j];
                                    for (cv, kv) in corr.iter_mut().zip(k) {
                                        *cv -= kv * wj;
                                    }
                                }
                                row.push((pj, corr));
                            }
                        }
                    }
                }
                row
            })
            .collect();
        NystromGrid { quad, chi, active, near }
    }

    /// Grid for `v`, using the potential's support radius.
    pub fn for_potential(quad: Arc<VolumeQuadrature>, chi: CutoffProfile, v: &MatrixPotential) -> Self {
        Self::new(quad, chi, v.r0())
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn node(&self, k: usize) -> [f64; 3] {
        self.quad.nodes[self.active[k]]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.quad.weights[self.active[k]]
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::hash::Fnv::new();
        h.write_u64(self.quad.fingerprint());
        h.write_f64(self.chi.r0);
        h.write_f64(self.chi.margin);
        h.write_u64(self.active.len() as u64);
        h.finish()
    }
}

/// Dense discretisation of `V R0(lambda) chi` on the active nodes.
pub struct NystromOperator {
    pub matrix: Mat<Complex64>,
    pub sp: SpectralParameter,
    pub potential_hash: u64,
    pub grid_hash: u64,
}

/// Which determinant to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetVariant {
    IdPlusK,
    IdMinusK4,
}

fn check_size(n: usize) -> Result<()> {
    if 4 * n > MAX_DIMENSION {
        return Err(Error::AllocationFailure(4 * n));
    }
    Ok(())
}

/// Discrete free resolvent `R0(lambda)` on the active nodes, including the
/// quadrature weights of the source node (`4N x 4N`).
pub fn assemble_resolvent(sp: &SpectralParameter, grid: &NystromGrid) -> Result<Mat<Complex64>> {
    let n = grid.len();
    check_size(n)?;
    let kappa = sp.kappa;
    let lambda = sp.lambda;
    let alg = algebra();
    let bpl = beta_plus(lambda);
    let nodes: Vec<[f64; 3]> = (0..n).map(|k| grid.node(k)).collect();
    let weights: Vec<f64> = (0..n).map(|k| grid.weight(k)).collect();
    let chi: Vec<f64> = nodes.iter().map(|x| grid.chi.eval(*x)).collect();
    let mut mat = Mat::<Complex64>::zeros(4 * n, 4 * n);
    let rem0 = Complex64::i() * kappa / (4.0 * PI);
    let fill_column = |j: usize, mut cols: faer::MatMut<'_, Complex64>| {
        let xj = nodes[j];
        let wj = weights[j] * chi[j];
        for i in 0..n {
            let (sb, v) = if i == j {
                (rem0 * wj, [Complex64::new(0.0, 0.0); 3])
            } else {
                let xi = nodes[i];
                let d = [xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]];
                let r = norm3(d);
                let (a, b) = dirac_kernel_factors(kappa, r);
                let s = a * (wj / r);
                (b * wj, [s * d[0], s * d[1], s * d[2]])
            };
            write_block(&mut cols, i, sb, v, &bpl);
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        mat.par_col_chunks_mut(4).enumerate().for_each(|(j, c)| fill_column(j, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (j, c) in mat.col_chunks_mut(4).enumerate() {
            fill_column(j, c);
        }
    }
    // singular corrections
    let k2 = kappa * kappa / (8.0 * PI);
    let k4 = kappa.powi(4) / (32.0 * PI);
    let i = Complex64::i();
    for (row, list) in grid.near.iter().enumerate() {
        for (col, c) in list {
            let x = chi[*col];
            let sb = (Complex64::new(c[0], 0.0) - k2 * c[7] + k4 * c[11] / 3.0) * x;
            let v = [1, 2, 3].map(|m| (i * c[m] + i * k2 * c[3 + m] - i * k4 * c[7 + m]) * x);
            let blk = bpl * sb + alpha_combination(&alg.alpha, v);
            for s in 0..4 {
                for t in 0..4 {
                    mat[(4 * row + s, 4 * col + t)] += blk.0[s][t];
                }
            }
        }
    }
    Ok(mat)
}

#[inline]
fn alpha_combination(alpha: &[Mat4; 3], v: [Complex64; 3]) -> Mat4 {
    alpha[0] * v[0] + alpha[1] * v[1] + alpha[2] * v[2]
}

/// Write `sb (beta + lambda) + v . alpha` into rows `4i..4i+4` of a 4-column chunk.
#[inline]
fn write_block(cols: &mut faer::MatMut<'_, Complex64>, i: usize, sb: Complex64, v: [Complex64; 3], bpl: &Mat4) {
    let [x, y, z] = v;
    let im = Complex64::i();
    // sigma . v
    let s = [[z, x - im * y], [x + im * y, -z]];
    let r = 4 * i;
    for a in 0..2 {
        cols[(r + a, a)] = sb * bpl.0[a][a];
        cols[(r + 2 + a, 2 + a)] = sb * bpl.0[2 + a][2 + a];
        for b in 0..2 {
            cols[(r + a, 2 + b)] = s[a][b];
            cols[(r + 2 + a, b)] = s[a][b];
        }
    }
}

/// Assemble `K = V R0(lambda) chi` on the active nodes of `grid`.
pub fn assemble_k(sp: &SpectralParameter, v: &MatrixPotential, grid: &NystromGrid) -> Result<NystromOperator> {
    let mut matrix = assemble_resolvent(sp, grid)?;
    apply_potential_left(&mut matrix, v, grid);
    Ok(NystromOperator { matrix, sp: *sp, potential_hash: v.fingerprint(), grid_hash: grid.fingerprint() })
}

/// Multiply block row `i` by `V(x_i)`.
pub fn apply_potential_left(matrix: &mut Mat<Complex64>, v: &MatrixPotential, grid: &NystromGrid) {
    let n = grid.len();
    let ncols = matrix.ncols();
    for i in 0..n {
        let vi = sample_potential(v, grid.node(i));
        if v.channel == Channel::ElectricI4 {
            let s = vi.0[0][0];
            for r in 4 * i..4 * i + 4 {
                for c in 0..ncols {
                    matrix[(r, c)] *= s;
                }
            }
            continue;
        }
        for c in 0..ncols {
            let col = [0, 1, 2, 3].map(|s| matrix[(4 * i + s, c)]);
            let out = vi.apply(&col);
            for s in 0..4 {
                matrix[(4 * i + s, c)] = out[s];
            }
        }
    }
}

/// `det(I + K)` or `det(I - K^4)` in log form.
pub fn fredholm_det(k: &NystromOperator, variant: DetVariant) -> LogDet {
    fredholm_det_matrix(&k.matrix, variant)
}

pub fn fredholm_det_matrix(k: &Mat<Complex64>, variant: DetVariant) -> LogDet {
    let n = k.nrows();
    let shifted = |m: &Mat<Complex64>, s: f64| {
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] += s;
        }
        a
    };
    match variant {
        DetVariant::IdPlusK => log_det(shifted(k, 1.0)),
        DetVariant::IdMinusK4 => {
            let k2 = k * k;
            log_det(shifted(k, 1.0)).mul(log_det(shifted(&(-k), 1.0))).mul(log_det(shifted(&k2, 1.0)))
        }
    }
}

/// `det(I + K)` evaluated by consuming the assembled matrix.
pub fn det_id_plus_k(mut k: Mat<Complex64>) -> LogDet {
    for i in 0..k.nrows() {
        k[(i, i)] += 1.0;
    }
    LuFactor::new(k).log_det()
}

/// Which sheet a determinant function evaluates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SheetRule {
    Fixed(Sheet),
    /// Physical sheet for `Im lambda >= 0`, Second sheet below: the
    /// continuation of the Physical-sheet determinant across `|lambda| > 1`.
    Continued,
}

impl SheetRule {
    pub fn sheet_at(self, lambda: Complex64) -> Sheet {
        match self {
            SheetRule::Fixed(s) => s,
            SheetRule::Continued => {
                if lambda.im >= 0.0 {
                    Sheet::Physical
                } else {
                    Sheet::Second
                }
            }
        }
    }
}

/// `lambda -> det(I + K(lambda))` for one potential and grid, optionally
/// backed by a [`DetCache`].
pub struct NystromDet<'a> {
    pub v: &'a MatrixPotential,
    pub grid: &'a NystromGrid,
    pub rule: SheetRule,
    pub cache: Option<&'a DetCache>,
    potential_hash: u64,
    grid_hash: u64,
}

impl<'a> NystromDet<'a> {
    pub fn new(v: &'a MatrixPotential, grid: &'a NystromGrid, rule: SheetRule, cache: Option<&'a DetCache>) -> Self {
        NystromDet { v, grid, rule, cache, potential_hash: v.fingerprint(), grid_hash: grid.fingerprint() }
    }

    pub fn eval_at(&self, sp: &SpectralParameter) -> Result<LogDet> {
        if let Some(c) = self.cache {
            if let Some(d) = c.get(self.potential_hash, self.grid_hash, sp.sheet, sp.lambda) {
                return Ok(d);
            }
        }
        let d = if self.v.is_zero() {
            LogDet::ONE
        } else {
            det_id_plus_k(assemble_k(sp, self.v, self.grid)?.matrix)
        };
        if let Some(c) = self.cache {
            c.insert(self.potential_hash, self.grid_hash, sp.sheet, sp.lambda, d);
        }
        Ok(d)
    }
}

impl DetFn for NystromDet<'_> {
    fn eval(&self, lambda: Complex64) -> Result<LogDet> {
        let sp = SpectralParameter::new(lambda, self.rule.sheet_at(lambda))?;
        self.eval_at(&sp)
    }
}

/// Largest singular value of the matrix.
pub fn operator_norm(k: &NystromOperator) -> f64 {
    largest_singular_value(k.matrix.as_ref(), 1e-10, 2000)
}
