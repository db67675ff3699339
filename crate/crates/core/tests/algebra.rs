use diracres::dirac::{algebra, bracket, fw_transform, projector, symbol_d0, Branch, Mat4};
use diracres::resolvent::{dirac_resolvent_kernel, helmholtz_kernel};
use diracres::spectral::{Sheet, SpectralParameter};
use diracres::verify::{check_anticommutation, check_fw_conjugation, check_kernel_fd, check_projectors};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The standard Dirac representation written out entry by entry.
fn reference_matrices() -> ([Mat4; 3], Mat4) {
    let i = Complex64::i();
    let z = c(0.0);
    let o = c(1.0);
    let block = |s: [[Complex64; 2]; 2]| {
        Mat4([
            [z, z, s[0][0], s[0][1]],
            [z, z, s[1][0], s[1][1]],
            [s[0][0], s[0][1], z, z],
            [s[1][0], s[1][1], z, z],
        ])
    };
    let alpha = [block([[z, o], [o, z]]), block([[z, -i], [i, z]]), block([[o, z], [z, -o]])];
    let beta = Mat4::diag([o, o, -o, -o]);
    (alpha, beta)
}

#[test]
fn matrices_are_the_standard_representation() {
    let a = algebra();
    let (alpha, beta) = reference_matrices();
    for j in 0..3 {
        assert_eq!((a.alpha[j] - alpha[j]).max_abs(), 0.0);
        assert!(a.alpha[j].is_hermitian(0.0));
    }
    assert_eq!((a.beta - beta).max_abs(), 0.0);
}

#[test]
fn identity_suite_meets_tolerances() {
    assert_eq!(check_anticommutation().residual, 0.0);
    let p = check_projectors(2024, 100);
    assert!(p.pass && p.residual <= 1e-12, "{p:?}");
    let f = check_fw_conjugation(2024, 100);
    assert!(f.pass && f.residual <= 1e-10, "{f:?}");
}

#[test]
fn kernel_matches_finite_differences() {
    let k = check_kernel_fd(2024, 20).unwrap();
    assert!(k.pass && k.residual <= 1e-6, "{k:?}");
}

/// `(-i alpha.grad + beta + lambda) e^{i kappa r}/(4 pi r)` with the
/// gradient taken analytically: `grad G = (i kappa - 1/r) G rhat`.
fn analytic_kernel(sp: &SpectralParameter, x: [f64; 3], y: [f64; 3]) -> Mat4 {
    let (alpha, beta) = reference_matrices();
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let g = (Complex64::i() * sp.kappa * r).exp() / (4.0 * std::f64::consts::PI * r);
    let dg = (Complex64::i() * sp.kappa - 1.0 / r) * g;
    let mut m = beta * g + Mat4::identity() * (sp.lambda * g);
    for j in 0..3 {
        m = m + alpha[j] * (-Complex64::i() * dg * (d[j] / r));
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_matches_analytic_derivative(
        x in prop::array::uniform3(-1.0f64..1.0),
        y in prop::array::uniform3(-1.0f64..1.0),
        re in -3.0f64..3.0,
        im in -2.0f64..2.0,
        second in any::<bool>(),
    ) {
        let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        prop_assume!(r > 1e-3 && im.abs() > 1e-3);
        let sheet = if second { Sheet::Second } else { Sheet::Physical };
        let sp = SpectralParameter::new(Complex64::new(re, im), sheet).unwrap();
        let k = dirac_resolvent_kernel(&sp, x, y).unwrap();
        let want = analytic_kernel(&sp, x, y);
        prop_assert!((k - want).norm() <= 1e-12 * want.norm());
    }

    #[test]
    fn kernel_is_symmetric_under_exchange(
        x in prop::array::uniform3(-1.0f64..1.0),
        y in prop::array::uniform3(-1.0f64..1.0),
        re in -3.0f64..3.0,
        im in 0.01f64..2.0,
    ) {
        let sp = SpectralParameter::new(Complex64::new(re, im), Sheet::Physical).unwrap();
        prop_assume!(helmholtz_kernel(&sp, x, y).is_ok());
        let g1 = helmholtz_kernel(&sp, x, y).unwrap();
        let g2 = helmholtz_kernel(&sp, y, x).unwrap();
        prop_assert_eq!(g1, g2);
    }

    #[test]
    fn projectors_split_the_symbol(xi in prop::array::uniform3(-20.0f64..20.0)) {
        let (p, m) = (projector(xi, Branch::Plus), projector(xi, Branch::Minus));
        let b = bracket(xi);
        let d = symbol_d0(xi);
        prop_assert!((d - (p - m) * b).max_abs() <= 1e-12 * b);
        let g = fw_transform(xi);
        prop_assert!((g * d * g.adjoint() - algebra().beta * b).max_abs() <= 1e-10 * b);
    }
}

#[test]
fn kernel_rejects_coincident_points() {
    let sp = SpectralParameter::new(Complex64::new(0.5, 0.5), Sheet::Physical).unwrap();
    assert!(dirac_resolvent_kernel(&sp, [0.1, 0.2, 0.3], [0.1, 0.2, 0.3]).is_err());
}

#[test]
fn physical_sheet_kernel_decays() {
    let sp = SpectralParameter::new(Complex64::new(0.3, 0.0), Sheet::Physical).unwrap();
    let near = dirac_resolvent_kernel(&sp, [0.0; 3], [1.0, 0.0, 0.0]).unwrap().norm();
    let far = dirac_resolvent_kernel(&sp, [0.0; 3], [10.0, 0.0, 0.0]).unwrap().norm();
    // e^{-sqrt(1 - 0.09) * 9} / 10 relative decay
    let want = (-(0.91f64).sqrt() * 9.0).exp() / 10.0;
    assert!(far / near < 2.0 * want, "{} vs {want}", far / near);
}
