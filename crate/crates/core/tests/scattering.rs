use std::sync::Arc;

use diracres::linalg::wrap_angle;
use diracres::nystrom::NystromGrid;
use diracres::potential::MatrixPotential;
use diracres::quadrature::{build_sphere_quadrature, build_volume_quadrature, SphereQuadrature};
use diracres::radial::radial_scattering_determinant;
use diracres::resolvent::CutoffProfile;
use diracres::scattering::{
    fw_consistency_residual, scattering_determinant, scattering_matrix, scattering_matrix_continued, spectral_shift_curve,
    ScatteringSetup,
};
use diracres::verify::{check_reciprocity, check_sheet_jump, check_unitarity};
use num_complex::Complex64;

struct Setup {
    v: MatrixPotential,
    grid: NystromGrid,
    sphere: SphereQuadrature,
}

impl Setup {
    fn new(g: f64, cells: usize, polar: usize, azimuthal: usize) -> Self {
        let v = MatrixPotential::electric(g, 1.0).unwrap();
        let chi = CutoffProfile::new(1.0, 0.25).unwrap();
        let quad = build_volume_quadrature(1.0, 0.25, cells, 2).unwrap();
        let grid = NystromGrid::for_potential(Arc::new(quad), chi, &v);
        let sphere = build_sphere_quadrature(polar, azimuthal).unwrap();
        Setup { v, grid, sphere }
    }

    fn setup(&self) -> ScatteringSetup<'_> {
        ScatteringSetup { v: &self.v, grid: &self.grid, sphere: &self.sphere }
    }
}

#[test]
fn free_scattering_matrix_is_identity() {
    let s = Setup::new(0.0, 2, 8, 16);
    for lambda in [-2.5, -1.2, 1.2, 2.5] {
        let sample = scattering_matrix(lambda, &s.setup()).unwrap();
        let n = sample.s_matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(sample.s_matrix[(i, j)], Complex64::new(want, 0.0));
            }
        }
        assert_eq!(scattering_determinant(&sample), Complex64::new(1.0, 0.0));
        assert_eq!((sample.xi, sample.unitarity_residual), (0.0, 0.0));
    }
}

#[test]
fn energies_inside_the_gap_are_rejected() {
    let s = Setup::new(2.0, 2, 8, 16);
    assert!(scattering_matrix(0.5, &s.setup()).is_err());
    assert!(scattering_matrix(1.0, &s.setup()).is_err());
}

#[test]
fn scattering_matrix_is_unitary() {
    let s = Setup::new(2.0, 3, 16, 32);
    for lambda in [-2.0, 1.5, 3.0] {
        let c = check_unitarity(lambda, &s.setup()).unwrap();
        assert!(c.pass && c.residual < 1e-10, "{c:?}");
    }
}

#[test]
fn determinant_is_reciprocal_under_conjugation() {
    let s = Setup::new(2.0, 3, 16, 32);
    for z in [Complex64::new(1.5, 0.2), Complex64::new(-2.2, 0.5)] {
        let c = check_reciprocity(z, &s.setup()).unwrap();
        assert!(c.pass && c.residual < 1e-8, "{c:?}");
    }
}

#[test]
fn continued_matrix_matches_boundary_value() {
    let s = Setup::new(2.0, 2, 8, 16);
    let a = scattering_determinant(&scattering_matrix(1.8, &s.setup()).unwrap());
    let b = scattering_determinant(&scattering_matrix_continued(Complex64::new(1.8, 1e-8), &s.setup()).unwrap());
    let c = scattering_determinant(&scattering_matrix_continued(Complex64::new(1.8, -1e-8), &s.setup()).unwrap());
    assert!((a - b).norm() < 1e-6 && (a - c).norm() < 1e-6, "{a} {b} {c}");
}

#[test]
fn sheet_jump_identity_holds_and_improves_with_the_sphere() {
    let s = Setup::new(2.0, 2, 16, 32);
    let quad = s.grid.quad.clone();
    for lambda in [Complex64::new(1.5, 0.3), Complex64::new(0.0, 2.0)] {
        let fine = check_sheet_jump(lambda, &quad, &s.grid.chi, &s.sphere).unwrap();
        assert!(fine.pass, "{fine:?}");
        let coarse_sphere = build_sphere_quadrature(6, 8).unwrap();
        let coarse = check_sheet_jump(lambda, &quad, &s.grid.chi, &coarse_sphere).unwrap();
        assert!(coarse.residual > fine.residual, "{coarse:?} vs {fine:?}");
    }
}

#[test]
fn far_field_matches_trace_of_the_free_kernel() {
    let s = Setup::new(2.0, 2, 16, 32);
    let nodes: Vec<[f64; 3]> = (0..s.grid.len()).map(|k| s.grid.node(k)).collect();
    for lambda in [1.5, -2.5] {
        assert!(fw_consistency_residual(lambda, &s.grid.chi, &nodes, &s.sphere).unwrap() < 1e-10);
    }
}

#[test]
fn phase_agrees_with_partial_waves() {
    let s = Setup::new(0.5, 4, 16, 32);
    for lambda in [-1.5, 1.5, 2.5] {
        let nys = scattering_matrix(lambda, &s.setup()).unwrap().s;
        let rad = radial_scattering_determinant(&s.v, lambda, 10).unwrap();
        let d = wrap_angle(nys.arg - rad.arg).abs();
        assert!(d < 3e-2, "lambda {lambda}: {} vs {}", nys.arg, rad.arg);
    }
}

#[test]
fn shift_curve_of_the_free_operator_vanishes() {
    let s = Setup::new(0.0, 2, 8, 16);
    let setup = s.setup();
    let sample = |l: f64| Ok(scattering_matrix(l, &setup)?.s);
    let curve = spectral_shift_curve(&sample, &[-3.0, -2.0, -1.1, 1.1, 2.0, 3.0], 4).unwrap();
    assert_eq!(curve.len(), 6);
    assert!(curve.iter().all(|p| p.xi == 0.0));
}
