//! Local correction integrals for the weakly singular parts of the Dirac
//! kernel on the cell-structured volume grid.
//!
//! Near the diagonal the kernel behaves like a combination of
//! `1/(4 pi r)`, `r_m/(4 pi r^3)`, `r_m/r` and `r` (with `r = x - y`). For each
//! pair of neighbouring cells we store the double integrals
//! `T[o][a][b] = int_{cell 0} int_{cell o} l_a(x) k(x - y) l_b(y) dy dx`
//! of these model kernels against the Lagrange basis `l` on the Gauss nodes.
//! Because the table is symmetric under `(o, a, b) -> (-o, b, a)` up to the
//! parity of `k`, the resulting corrections keep the discrete operator's
//! weighted adjoint structure exactly.

use crate::quadrature::gauss_legendre_on;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Number of model kernels: `1/(4 pi r)`, three `r_m/(4 pi r^3)`, three
/// `r_m/r`, `r`, three `r_m r` and `r^3`.
pub const N_KERNELS: usize = 12;

/// `+1` for the even model kernels, `-1` for the odd ones.
pub const KERNEL_PARITY: [f64; N_KERNELS] = [1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0];

/// Index of the first component of each vector-valued model kernel.
const VECTOR_KERNELS: [usize; 3] = [1, 4, 8];
/// Indices of the scalar model kernels.
const SCALAR_KERNELS: [usize; 3] = [0, 7, 11];

/// Power of the cell size `h` by which each model-kernel table scales.
const SCALE_POWER: [i32; N_KERNELS] = [5, 4, 4, 4, 6, 6, 6, 7, 8, 8, 8, 9];

/// Values of the model kernels at `r != 0`.
#[inline]
pub fn model_kernels(r: [f64; 3]) -> [f64; N_KERNELS] {
    let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let inv = 1.0 / n;
    let inv3 = inv * inv * inv / (4.0 * PI);
    [
        inv / (4.0 * PI),
        r[0] * inv3,
        r[1] * inv3,
        r[2] * inv3,
        r[0] * inv,
        r[1] * inv,
        r[2] * inv,
        n,
        r[0] * n,
        r[1] * n,
        r[2] * n,
        n * n * n,
    ]
}

/// Index of a neighbour offset in `{-1, 0, 1}^3`.
#[inline]
pub fn offset_index(o: [i32; 3]) -> usize {
    ((o[0] + 1) + 3 * (o[1] + 1) + 9 * (o[2] + 1)) as usize
}

fn offset_from_index(i: usize) -> [i32; 3] {
    let i = i as i32;
    [i % 3 - 1, (i / 3) % 3 - 1, i / 9 - 1]
}

/// Accuracy knobs of the table computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TableResolution {
    /// Gauss points per axis on each face of a corner (Duffy) pyramid.
    pub face_order: usize,
    /// Gauss points per axis on sub-boxes away from the singularity.
    pub box_order: usize,
}

impl Default for TableResolution {
    fn default() -> Self {
        TableResolution { face_order: 12, box_order: 12 }
    }
}

/// Correction integrals for unit cells; scaled to cell size `h` on lookup.
#[derive(Debug)]
pub struct CorrectionTable {
    pub gauss_order: usize,
    data: Vec<f64>,
}

impl CorrectionTable {
    fn per_cell(&self) -> usize {
        self.gauss_order.pow(3)
    }

    /// Table entry for cells of edge `h`.
    pub fn get(&self, o: [i32; 3], a: usize, b: usize, h: f64) -> [f64; N_KERNELS] {
        let m = self.per_cell();
        let base = ((offset_index(o) * m + a) * m + b) * N_KERNELS;
        let mut out = [0.0; N_KERNELS];
        for k in 0..N_KERNELS {
            out[k] = self.data[base + k] * h.powi(SCALE_POWER[k]);
        }
        out
    }
}

/// Lagrange basis on the Gauss nodes of `[0, 1]`.
struct Lagrange1d {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl Lagrange1d {
    fn new(q: usize) -> Self {
        let (nodes, _) = gauss_legendre_on(q, 0.0, 1.0);
        let denom = (0..q)
            .map(|i| (0..q).filter(|&j| j != i).map(|j| nodes[i] - nodes[j]).product::<f64>())
            .collect();
        Lagrange1d { nodes, denom }
    }

    fn eval(&self, t: f64, out: &mut [f64]) {
        let q = self.nodes.len();
        for i in 0..q {
            let mut p = 1.0;
            for j in 0..q {
                if j != i {
                    p *= t - self.nodes[j];
                }
            }
            out[i] = p / self.denom[i];
        }
    }
}

/// One-dimensional cross-correlations of the basis,
/// `A_ab(t) = int l_a(x) l_b(x - t - o) dx` over `x, x - t - o in [0, 1]`.
/// For fixed `t` the integrand is a polynomial of degree `2q - 2`, so a
/// `q`-point Gauss rule on the overlap is exact.
struct Correlation {
    basis: Lagrange1d,
    gauss: (Vec<f64>, Vec<f64>),
}

impl Correlation {
    fn new(q: usize) -> Self {
        Correlation { basis: Lagrange1d::new(q), gauss: gauss_legendre_on(q, 0.0, 1.0) }
    }

    /// `out[a * q + b] = A_ab(t)` for offset component `o`.
    fn eval(&self, t: f64, o: i32, out: &mut [f64]) {
        let q = self.basis.nodes.len();
        out[..q * q].iter_mut().for_each(|v| *v = 0.0);
        let shift = t + o as f64;
        let (lo, hi) = (shift.max(0.0), (shift + 1.0).min(1.0));
        if hi <= lo {
            return;
        }
        let mut la = [0.0; 8];
        let mut lb = [0.0; 8];
        for (g, w) in self.gauss.0.iter().zip(&self.gauss.1) {
            let x = lo + (hi - lo) * g;
            self.basis.eval(x, &mut la[..q]);
            self.basis.eval(x - shift, &mut lb[..q]);
            let ww = w * (hi - lo);
            for a in 0..q {
                for b in 0..q {
                    out[a * q + b] += ww * la[a] * lb[b];
                }
            }
        }
    }
}

/// Accumulates `w k(r) prod_i A_i(r_i)` into a block `[a][b][kernel]`.
struct Accumulator<'a> {
    corr: &'a Correlation,
    q: usize,
    o: [i32; 3],
    ax: [f64; 64],
    ay: [f64; 64],
    az: [f64; 64],
}

impl Accumulator<'_> {
    /// `weighted_kernel` is `w * k(r)` (the quadrature weight already folded in).
    fn add(&mut self, r: [f64; 3], weighted_kernel: [f64; N_KERNELS], out: &mut [f64]) {
        let q = self.q;
        let m = q * q * q;
        self.corr.eval(r[0], self.o[0], &mut self.ax);
        self.corr.eval(r[1], self.o[1], &mut self.ay);
        self.corr.eval(r[2], self.o[2], &mut self.az);
        for az in 0..q {
            for bz in 0..q {
                let cz = self.az[az * q + bz];
                if cz == 0.0 {
                    continue;
                }
                for ay in 0..q {
                    for by in 0..q {
                        let cyz = cz * self.ay[ay * q + by];
                        for axx in 0..q {
                            let a = axx + q * (ay + q * az);
                            for bx in 0..q {
                                let b = bx + q * (by + q * bz);
                                let c = cyz * self.ax[axx * q + bx];
                                let row = &mut out[(a * m + b) * N_KERNELS..(a * m + b + 1) * N_KERNELS];
                                for (d, k) in row.iter_mut().zip(weighted_kernel) {
                                    *d += c * k;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Integrate one neighbour offset: `T[o] = int k(r) A(r) dr` over the
/// difference box, split into the eight unit sub-boxes on which the
/// correlation `A` is polynomial. Sub-boxes with the origin as a corner are
/// split into pyramids with apex at the origin (Duffy); the `t^2` Jacobian
/// cancels the kernel singularity and leaves smooth integrands.
fn integrate_offset(q: usize, o: [i32; 3], res: TableResolution, corr: &Correlation) -> Vec<f64> {
    let m = q * q * q;
    let mut out = vec![0.0; m * m * N_KERNELS];
    let mut acc = Accumulator { corr, q, o, ax: [0.0; 64], ay: [0.0; 64], az: [0.0; 64] };
    let (fg, fw) = gauss_legendre_on(res.face_order, 0.0, 1.0);
    // radial integrands are polynomials of degree <= 3 (2q - 1) + 5 in t
    let (tg, tw) = gauss_legendre_on(3 * q + 2, 0.0, 1.0);
    let (bg, bw) = gauss_legendre_on(res.box_order, 0.0, 1.0);
    for corner in 0..8 {
        // sub-box [n_i, n_i + 1] per axis
        let n = [0, 1, 2].map(|i| if corner >> i & 1 == 0 { -o[i] - 1 } else { -o[i] });
        let at_origin = n.iter().all(|&c| c == 0 || c == -1);
        if at_origin {
            // far corner direction s_i = +-1
            let sgn = n.map(|c| if c == 0 { 1.0 } else { -1.0 });
            for ax in 0..3 {
                let (u, v) = ((ax + 1) % 3, (ax + 2) % 3);
                for (gu, wu) in fg.iter().zip(&fw) {
                    for (gv, wv) in fg.iter().zip(&fw) {
                        let mut p = [0.0; 3];
                        p[ax] = sgn[ax];
                        p[u] = sgn[u] * gu;
                        p[v] = sgn[v] * gv;
                        for (t, wt) in tg.iter().zip(&tw) {
                            let r = [t * p[0], t * p[1], t * p[2]];
                            let w = wu * wv * wt * t * t;
                            acc.add(r, model_kernels(r).map(|k| k * w), &mut out);
                        }
                    }
                }
            }
        } else {
            for (gx, wx) in bg.iter().zip(&bw) {
                for (gy, wy) in bg.iter().zip(&bw) {
                    for (gz, wz) in bg.iter().zip(&bw) {
                        let r = [n[0] as f64 + gx, n[1] as f64 + gy, n[2] as f64 + gz];
                        let w = wx * wy * wz;
                        acc.add(r, model_kernels(r).map(|k| k * w), &mut out);
                    }
                }
            }
        }
    }
    out
}

/// Compute the unit-cell table for Gauss order `q`.
pub fn compute_table(q: usize, res: TableResolution) -> CorrectionTable {
    assert!((1..=6).contains(&q));
    let m = q * q * q;
    let corr = Correlation::new(q);
    let one_offset = |oi: usize| integrate_offset(q, offset_from_index(oi), res, &corr);
    // offsets 13..27 (the origin and one of each pair +-o) are integrated,
    // the rest follow from T[-o][b][a] = parity * T[o][a][b]
    #[cfg(feature = "parallel")]
    let blocks: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (13..27).into_par_iter().map(one_offset).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<Vec<f64>> = (13..27).map(one_offset).collect();
    let block = m * m * N_KERNELS;
    let mut data = vec![0.0; 27 * block];
    for (i, b) in blocks.into_iter().enumerate() {
        data[(13 + i) * block..(14 + i) * block].copy_from_slice(&b);
    }
    let idx = |oi: usize, a: usize, b: usize, k: usize| ((oi * m + a) * m + b) * N_KERNELS + k;
    let transpose_fill = |data: &mut Vec<f64>| {
        for oi in 0..13 {
            let oj = 26 - oi;
            for a in 0..m {
                for b in 0..m {
                    for k in 0..N_KERNELS {
                        data[idx(oi, a, b, k)] = KERNEL_PARITY[k] * data[idx(oj, b, a, k)];
                    }
                }
            }
        }
    };
    transpose_fill(&mut data);
    // Average over the 48 symmetries of the cube so that the table (and with
    // it the discrete operator) inherits the grid's symmetry exactly; the
    // residual asymmetry of the numerical integrals would otherwise split
    // symmetry-degenerate zeros.
    let mut avg = vec![0.0; data.len()];
    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        for signs in 0..8 {
            let s = [0, 1, 2].map(|i| if signs >> i & 1 == 1 { -1i32 } else { 1 });
            let map_local = |a: usize| -> usize {
                let old = [a % q, (a / q) % q, a / (q * q)];
                let new = [0, 1, 2].map(|i| if s[i] > 0 { old[perm[i]] } else { q - 1 - old[perm[i]] });
                new[0] + q * (new[1] + q * new[2])
            };
            for oi in 0..27 {
                let o = offset_from_index(oi);
                let on = offset_index([0, 1, 2].map(|i| s[i] * o[perm[i]]));
                for a in 0..m {
                    let an = map_local(a);
                    for b in 0..m {
                        let bn = map_local(b);
                        let src = idx(oi, a, b, 0);
                        let dst = idx(on, an, bn, 0);
                        for k in SCALAR_KERNELS {
                            avg[dst + k] += data[src + k];
                        }
                        for k in VECTOR_KERNELS {
                            for c in 0..3 {
                                avg[dst + k + c] += s[c] as f64 * data[src + k + perm[c]];
                            }
                        }
                    }
                }
            }
        }
    }
    let mut data: Vec<f64> = avg.into_iter().map(|v| v / 48.0).collect();
    transpose_fill(&mut data);
    // the self block must be (anti)symmetric on its own
    for a in 0..m {
        for b in a..m {
            for k in 0..N_KERNELS {
                let (p, r) = (idx(13, a, b, k), idx(13, b, a, k));
                let avg = 0.5 * (data[p] + KERNEL_PARITY[k] * data[r]);
                data[p] = avg;
                data[r] = KERNEL_PARITY[k] * avg;
            }
        }
    }
    CorrectionTable { gauss_order: q, data }
}

/// Process-wide cache of tables at the default resolution.
pub fn correction_table(q: usize) -> Arc<CorrectionTable> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CorrectionTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&q) {
        return t.clone();
    }
    let t = Arc::new(compute_table(q, TableResolution::default()));
    cache.lock().unwrap().entry(q).or_insert(t).clone()
}
