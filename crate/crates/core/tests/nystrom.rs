use std::sync::Arc;

use diracres::linalg::log_det;
use diracres::nystrom::{
    assemble_k, det_id_plus_k, fredholm_det, operator_norm, DetVariant, NystromDet, NystromGrid, SheetRule,
};
use diracres::potential::MatrixPotential;
use diracres::quadrature::build_volume_quadrature;
use diracres::resolvent::CutoffProfile;
use diracres::search::{count_zeros, find_zeros, DetFn, Method, Rect, SearchOptions};
use diracres::spectral::{Sheet, SpectralParameter};
use num_complex::Complex64;

/// Radial-oracle resonance of `V = 2 p(|x|) I` (channel `kappa = 1`, multiplicity 2).
const ORACLE: (f64, f64) = (-0.7856382402659374, -0.3565116809810667);

fn grid(v: &MatrixPotential, cells: usize, order: usize) -> NystromGrid {
    let chi = CutoffProfile::new(v.r0(), 0.25).unwrap();
    let quad = build_volume_quadrature(v.r0(), 0.25, cells, order).unwrap();
    NystromGrid::for_potential(Arc::new(quad), chi, v)
}

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn free_operator_is_zero_and_det_is_one() {
    let v = MatrixPotential::electric(0.0, 1.0).unwrap();
    let g = grid(&v, 2, 2);
    for (lambda, sheet) in [(z(1.5, 0.3), Sheet::Physical), (z(-2.0, -1.0), Sheet::Second), (z(0.2, 0.0), Sheet::Physical)] {
        let sp = SpectralParameter::new(lambda, sheet).unwrap();
        let k = assemble_k(&sp, &v, &g).unwrap();
        assert!(k.matrix.col_iter().all(|c| c.iter().all(|x| *x == Complex64::new(0.0, 0.0))));
        let d = det_id_plus_k(k.matrix);
        assert_eq!((d.log_abs, d.arg), (0.0, 0.0));
        let f = NystromDet::new(&v, &g, SheetRule::Fixed(sheet), None);
        assert_eq!(f.eval(lambda).unwrap().to_complex(), Complex64::new(1.0, 0.0));
    }
}

#[test]
fn free_search_finds_nothing() {
    let v = MatrixPotential::electric(0.0, 1.0).unwrap();
    let g = grid(&v, 2, 2);
    let f = NystromDet::new(&v, &g, SheetRule::Fixed(Sheet::Second), None);
    let region = Rect::new(0.2, 3.0, -1.5, -0.01).unwrap();
    let out = find_zeros(&f, &region, Sheet::Second, Method::Nystrom, &SearchOptions::default()).unwrap();
    assert_eq!((out.total_count, out.zeros.len()), (0, 0));
}

#[test]
fn small_operator_has_no_zeros() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let g = grid(&v, 2, 2);
    let region = Rect::new(-3.0, 3.0, -1.5, -0.05).unwrap();
    let mut worst: f64 = 0.0;
    for re in [-3.0, -1.5, 0.0, 1.5, 3.0] {
        for im in [-1.5, -0.75, -0.05] {
            let sp = SpectralParameter::new(z(re, im), Sheet::Second).unwrap();
            worst = worst.max(operator_norm(&assemble_k(&sp, &v, &g).unwrap()));
        }
    }
    let scaled = v.scaled(0.5 / worst);
    let f = NystromDet::new(&scaled, &g, SheetRule::Fixed(Sheet::Second), None);
    let c = count_zeros(&f, &region, &SearchOptions::default()).unwrap();
    assert_eq!(c.count, 0);
}

#[test]
fn k4_determinant_factorises() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let g = grid(&v, 2, 1);
    let sp = SpectralParameter::new(z(1.3, -0.4), Sheet::Second).unwrap();
    let k = assemble_k(&sp, &v, &g).unwrap();
    let n = k.matrix.nrows();
    let k2 = &k.matrix * &k.matrix;
    let mut a = -(&k2 * &k2);
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    let direct = log_det(a).to_complex();
    let factored = fredholm_det(&k, DetVariant::IdMinusK4).to_complex();
    assert!((direct - factored).norm() < 1e-9 * direct.norm(), "{direct} vs {factored}");
    assert!((fredholm_det(&k, DetVariant::IdPlusK).to_complex() - det_id_plus_k(k.matrix.clone()).to_complex()).norm() < 1e-12 * direct.norm().max(1.0));
}

#[test]
fn continued_determinant_is_continuous_across_the_continuum() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let g = grid(&v, 2, 2);
    let f = NystromDet::new(&v, &g, SheetRule::Continued, None);
    for re in [-2.5, 1.7] {
        let above = f.eval(z(re, 1e-7)).unwrap().to_complex();
        let below = f.eval(z(re, -1e-7)).unwrap().to_complex();
        assert!((above - below).norm() < 1e-5 * above.norm(), "{above} vs {below}");
    }
}

#[test]
fn charge_conjugation_relates_opposite_couplings() {
    // kappa(-conj lambda) = -conj kappa(lambda) on either sheet; together
    // with charge conjugation, det for g at lambda matches det for -g at
    // -conj lambda up to conjugation
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let w = MatrixPotential::electric(-2.0, 1.0).unwrap();
    let (gv, gw) = (grid(&v, 2, 2), grid(&w, 2, 2));
    let f = NystromDet::new(&v, &gv, SheetRule::Fixed(Sheet::Second), None);
    let h = NystromDet::new(&w, &gw, SheetRule::Fixed(Sheet::Second), None);
    for lambda in [z(1.3, -0.6), z(-0.4, -1.1)] {
        let a = f.eval(lambda).unwrap();
        let b = h.eval(-lambda.conj()).unwrap();
        assert!((a.log_abs - b.log_abs).abs() < 1e-8, "{a:?} vs {b:?}");
    }
}

#[test]
fn coarse_grid_resonances_approach_the_oracle() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let oracle = z(ORACLE.0, ORACLE.1);
    let mut errors = Vec::new();
    for cells in [4, 5] {
        let g = grid(&v, cells, 2);
        let f = NystromDet::new(&v, &g, SheetRule::Fixed(Sheet::Second), None);
        let out =
            find_zeros(&f, &Rect::square(oracle, 0.3), Sheet::Second, Method::Nystrom, &SearchOptions::default()).unwrap();
        assert_eq!(out.total_count, 2);
        assert_eq!(out.zeros.len(), 1, "{:?}", out.zeros);
        assert_eq!(out.zeros[0].multiplicity, 2);
        errors.push((out.zeros[0].lambda - oracle).norm());
    }
    assert!(errors[1] < errors[0], "{errors:?}");
    assert!(errors[1] < 3e-2, "{errors:?}");
}
