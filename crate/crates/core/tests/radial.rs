use diracres::potential::MatrixPotential;
use diracres::radial::{
    channel_s_matrix, jost_for_potential, radial_bound_states, radial_reduce, radial_resonances, radial_scattering_determinant,
    radial_shift_curve, spherical_hankel1, RadialChannel,
};
use diracres::search::{Rect, SearchOptions};
use diracres::spectral::{Sheet, SpectralParameter};
use num_complex::Complex64;

/// Second-sheet resonances of `V = 2 p(|x|) I`, `R0 = 1`, from an independent
/// high-accuracy integration of the radial equations (DOP853, rtol 1e-12)
/// matched to outgoing spherical Hankel functions: `(lambda, kappa)`.
const G2_RESONANCES: [(f64, f64, i32); 5] = [
    (-2.752899873340997, -1.162615353601222, 2),
    (-1.8002310338088308, -0.7135989254995547, -1),
    (-0.7856382402659374, -0.3565116809810667, 1),
    (0.5328176318815436, -2.3063718811294085, -2),
    (1.0584597854821995, -2.3371968862081367, 2),
];

/// The only eigenvalue of `V = 4 p(|x|) I` in the gap, channel `kappa = 1`.
const G4_EIGENVALUE: f64 = -0.5890934498928504;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn resonances_match_independent_integration() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let opts = SearchOptions::default();
    for &(re, im, kappa) in &G2_RESONANCES {
        let region = Rect::square(z(re, im), 0.2);
        let found = radial_resonances(&v, &region, 3, &opts).unwrap();
        assert_eq!(found.len(), 1, "{found:?}");
        let r = &found[0];
        assert!((r.lambda - z(re, im)).norm() < 1e-7, "{:?} vs {re} {im}", r.lambda);
        assert_eq!(r.multiplicity, 2 * kappa.unsigned_abs() as usize);
        assert_eq!(r.flags, vec![format!("kappa={kappa}")]);
        assert_eq!(r.sheet, Sheet::Second);
    }
}

#[test]
fn jost_function_vanishes_only_in_its_channel() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let (re, im, kappa) = G2_RESONANCES[1];
    let sp = SpectralParameter::new(z(re, im), Sheet::Second).unwrap();
    for ch in radial_reduce(&v, 2).unwrap() {
        let j = jost_for_potential(ch, &sp, &v).unwrap().jost_value.norm();
        if ch.kappa == kappa {
            assert!(j < 1e-7, "{j}");
        } else {
            assert!(j > 1e-2, "kappa {} gives {j}", ch.kappa);
        }
    }
}

#[test]
fn mirrored_region_of_the_default_run_is_resonance_free_for_positive_real_parts() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let region = Rect::new(0.2, 3.0, -1.5, -0.01).unwrap();
    assert!(radial_resonances(&v, &region, 6, &SearchOptions::default()).unwrap().is_empty());
}

#[test]
fn charge_conjugation_mirrors_resonances() {
    let v = MatrixPotential::electric(-2.0, 1.0).unwrap();
    let (re, im, kappa) = G2_RESONANCES[2];
    let found = radial_resonances(&v, &Rect::square(z(-re, im), 0.2), 3, &SearchOptions::default()).unwrap();
    assert_eq!(found.len(), 1);
    assert!((found[0].lambda - z(-re, im)).norm() < 1e-7);
    assert_eq!(found[0].flags, vec![format!("kappa={}", -kappa)]);
}

#[test]
fn bound_state_matches_independent_integration() {
    let v = MatrixPotential::electric(4.0, 1.0).unwrap();
    let found = radial_bound_states(&v, [-0.999, 0.999], 4, 200, &SearchOptions::default()).unwrap();
    assert_eq!(found.len(), 1, "{found:?}");
    assert!((found[0].lambda - z(G4_EIGENVALUE, 0.0)).norm() < 1e-8, "{:?}", found[0].lambda);
    assert_eq!(found[0].multiplicity, 2);
}

#[test]
fn free_jost_function_is_one() {
    let v = MatrixPotential::electric(0.0, 1.0).unwrap();
    for lambda in [z(0.3, 0.0), z(1.7, 0.4), z(-2.5, -1.0), z(0.0, 3.0)] {
        for sheet in [Sheet::Physical, Sheet::Second] {
            let sp = SpectralParameter::new(lambda, sheet).unwrap();
            for ch in radial_reduce(&v, 8).unwrap() {
                let j = jost_for_potential(ch, &sp, &v).unwrap().jost_value;
                assert!((j - 1.0).norm() < 1e-8, "kappa {} at {lambda}: {j}", ch.kappa);
            }
        }
    }
}

#[test]
fn channel_scattering_coefficients_are_unimodular() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    for lambda in [-3.0, -1.2, 1.05, 2.5, 10.0] {
        for ch in radial_reduce(&v, 4).unwrap() {
            let s = channel_s_matrix(ch, lambda, &v).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-8, "kappa {} at {lambda}: |s| = {}", ch.kappa, s.norm());
        }
        let d = radial_scattering_determinant(&v, lambda, 8).unwrap();
        assert!(d.log_abs.abs() < 1e-7);
    }
}

#[test]
fn high_partial_waves_decouple() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let ch = RadialChannel::new(-40).unwrap();
    let s = channel_s_matrix(ch, 5.0, &v).unwrap();
    assert!((s - 1.0).norm() < 1e-10, "{s}");
    // also at an energy where k R0 exceeds the channel index
    let s = channel_s_matrix(RadialChannel::new(30).unwrap(), 80.0, &v).unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-8);
}

#[test]
fn hankel_functions_satisfy_wronskian() {
    // h_n^(1) = j_n + i y_n and j_{n+1} y_n - j_n y_{n+1} = 1/z^2 give
    // Im(h_{n+1} conj h_n) = -1/z^2 for real z
    for x in [0.5, 2.0, 7.5] {
        let h = spherical_hankel1(6, z(x, 0.0));
        for n in 0..6 {
            let w = (h[n + 1] * h[n].conj()).im;
            assert!((w + 1.0 / (x * x)).abs() < 1e-10 * (1.0 + h[n + 1].norm() * h[n].norm()), "n={n}, x={x}");
        }
    }
}

#[test]
fn free_shift_curve_vanishes() {
    let v = MatrixPotential::electric(0.0, 1.0).unwrap();
    let lambdas = [-5.0, -2.0, -1.1, 1.1, 2.0, 5.0];
    for p in radial_shift_curve(&v, &lambdas, 6, 2).unwrap() {
        assert!(p.xi.abs() < 1e-9, "{p:?}");
    }
}

#[test]
fn shift_curve_is_anchored_and_free_of_aliasing() {
    let v = MatrixPotential::electric(2.0, 1.0).unwrap();
    let grid = |n: usize| {
        let mut l: Vec<f64> = (0..=n).map(|k| 1.01 + 19.0 * k as f64 / n as f64).collect();
        l.extend(l.clone().iter().map(|x| -x));
        l.sort_by(f64::total_cmp);
        l
    };
    let coarse = radial_shift_curve(&v, &grid(40), 40, 8).unwrap();
    let fine = radial_shift_curve(&v, &grid(160), 40, 8).unwrap();
    for c in [&coarse, &fine] {
        assert!(c.first().unwrap().xi.abs() <= 0.5 && c.last().unwrap().xi.abs() <= 0.5);
    }
    // every coarse sample reappears in the fine curve with the same branch
    let mut matched = 0;
    for p in &coarse {
        if let Some(q) = fine.iter().find(|q| q.lambda == p.lambda) {
            assert!((p.xi - q.xi).abs() < 1e-9, "{p:?} vs {q:?}");
            matched += 1;
        }
    }
    assert!(matched >= 40);
    // the electric phase grows without bound: xi is far from its anchor
    // in the middle of each half-line
    assert!(coarse.iter().any(|p| p.xi.abs() > 2.0));
}
