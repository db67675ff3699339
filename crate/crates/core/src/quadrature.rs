//! Gauss–Legendre rules, the cell-structured volume quadrature on the cutoff
//! ball, and the product rule on the unit sphere.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|t| t * h).collect())
}

/// Tensor Gauss rule over the axis-aligned cells of `[-L, L]^3`,
/// `L = R0 + margin`, that meet the ball of radius `L`.
///
/// Nodes of a cell are stored contiguously, `q^3` per cell, with the local
/// index `a = ix + q iy + q^2 iz`.
#[derive(Clone, Debug)]
pub struct VolumeQuadrature {
    pub r0: f64,
    pub margin: f64,
    pub cells_per_axis: usize,
    pub gauss_order: usize,
    /// Cell edge length.
    pub h: f64,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Integer cell coordinates of each kept cell.
    pub cells: Vec<[i32; 3]>,
    /// Gauss nodes on the reference cell `[0, 1]^3`, in local order.
    pub local_nodes: Vec<[f64; 3]>,
    /// Tensor Gauss weights on the reference cell `[0, 1]^3`.
    pub local_weights: Vec<f64>,
    cell_index: HashMap<[i32; 3], usize>,
}

pub fn build_volume_quadrature(
    r0: f64,
    margin: f64,
    cells_per_axis: usize,
    gauss_order: usize,
) -> Result<VolumeQuadrature> {
    if !(r0 > 0.0) {
        return Err(Error::NonPositiveRadius(r0));
    }
    if !(margin > 0.0) {
        return Err(Error::InvalidResolution(format!("cutoff margin must be positive, got {margin}")));
    }
    if cells_per_axis < 2 {
        return Err(Error::InvalidResolution(format!(
            "cells_per_axis must be at least 2, got {cells_per_axis}"
        )));
    }
    if !(1..=6).contains(&gauss_order) {
        return Err(Error::InvalidResolution(format!(
            "gauss_order must lie in 1..=6, got {gauss_order}"
        )));
    }
    let l = r0 + margin;
    let n = cells_per_axis;
    let h = 2.0 * l / n as f64;
    let q = gauss_order;
    let (gx, gw) = gauss_legendre_on(q, 0.0, 1.0);
    let mut local_nodes = Vec::with_capacity(q * q * q);
    let mut local_weights = Vec::with_capacity(q * q * q);
    for iz in 0..q {
        for iy in 0..q {
            for ix in 0..q {
                local_nodes.push([gx[ix], gx[iy], gx[iz]]);
                local_weights.push(gw[ix] * gw[iy] * gw[iz]);
            }
        }
    }
    let vol = h * h * h;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut cells = Vec::new();
    let mut cell_index = HashMap::new();
    for cz in 0..n as i32 {
        for cy in 0..n as i32 {
            for cx in 0..n as i32 {
                let lo = [cx, cy, cz].map(|c| -l + c as f64 * h);
                // distance from the origin to the nearest point of the cell
                let d2: f64 = lo
                    .iter()
                    .map(|&a| {
                        let b = a + h;
                        if a > 0.0 {
                            a * a
                        } else if b < 0.0 {
                            b * b
                        } else {
                            0.0
                        }
                    })
                    .sum();
                if d2 >= l * l {
                    continue;
                }
                cell_index.insert([cx, cy, cz], cells.len());
                cells.push([cx, cy, cz]);
                for (p, w) in local_nodes.iter().zip(&local_weights) {
                    nodes.push([lo[0] + h * p[0], lo[1] + h * p[1], lo[2] + h * p[2]]);
                    weights.push(w * vol);
                }
            }
        }
    }
    Ok(VolumeQuadrature {
        r0,
        margin,
        cells_per_axis,
        gauss_order,
        h,
        nodes,
        weights,
        cells,
        local_nodes,
        local_weights,
        cell_index,
    })
}

impl VolumeQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.gauss_order.pow(3)
    }

    /// Half width `L = R0 + margin` of the bounding box.
    pub fn half_width(&self) -> f64 {
        self.r0 + self.margin
    }

    /// Index of the kept cell with integer coordinates `c`, if any.
    pub fn cell_at(&self, c: [i32; 3]) -> Option<usize> {
        self.cell_index.get(&c).copied()
    }

    /// Cell and local index of node `i`.
    pub fn locate(&self, i: usize) -> (usize, usize) {
        let m = self.nodes_per_cell();
        (i / m, i % m)
    }

    /// Sum of weights, i.e. the volume of the kept cells.
    pub fn covered_volume(&self) -> f64 {
        self.cells.len() as f64 * self.h.powi(3)
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| f(*x) * w).sum()
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::hash::Fnv::new();
        h.write_str("volume");
        h.write_f64(self.r0);
        h.write_f64(self.margin);
        h.write_u64(self.cells_per_axis as u64);
        h.write_u64(self.gauss_order as u64);
        h.finish()
    }
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos(theta)` times the
/// uniform rule in `phi`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    pub polar_order: usize,
    pub azimuthal_count: usize,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

pub fn build_sphere_quadrature(polar_order: usize, azimuthal_count: usize) -> Result<SphereQuadrature> {
    if polar_order < 4 || azimuthal_count < 8 {
        return Err(Error::InvalidResolution(format!(
            "sphere rule needs polar_order >= 4 and azimuthal_count >= 8, got {polar_order} x {azimuthal_count}"
        )));
    }
    let (ct, cw) = gauss_legendre(polar_order);
    let dphi = 2.0 * PI / azimuthal_count as f64;
    let mut nodes = Vec::with_capacity(polar_order * azimuthal_count);
    let mut weights = Vec::with_capacity(polar_order * azimuthal_count);
    for (c, w) in ct.iter().zip(&cw) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for k in 0..azimuthal_count {
            let phi = k as f64 * dphi;
            nodes.push([s * phi.cos(), s * phi.sin(), *c]);
            weights.push(w * dphi);
        }
    }
    Ok(SphereQuadrature { polar_order, azimuthal_count, nodes, weights })
}

impl SphereQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| f(*x) * w).sum()
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::hash::Fnv::new();
        h.write_str("sphere");
        h.write_u64(self.polar_order as u64);
        h.write_u64(self.azimuthal_count as u64);
        h.finish()
    }
}
