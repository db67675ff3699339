//! Partial-wave solver for electric potentials `V = v(r) I`: channel
//! reduction, Jost functions and channel scattering phases.
//!
//! In the channel with Dirac quantum number `kappa` the radial pair `(G, F)`
//! solves
//! `G' = -(kappa/r) G + (lambda + 1 - v) F`, `F' = (kappa/r) F - (lambda - 1 - v) G`.
//! The Jost function is the Wronskian of the regular solution with the
//! outgoing free solution at the support radius, normalised to one for `v = 0`.

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeFailure};
use crate::linalg::LogDet;
use crate::potential::{Channel, MatrixPotential};
use crate::scattering::{spectral_shift_curve_factored, ShiftPoint};
use crate::search::{find_real_zeros, find_zeros, sort_zeros, Method, Rect, Resonance, SearchOptions};
use crate::spectral::{Sheet, SpectralParameter};
use num_complex::Complex64;

/// Inner starting radius of the regular solution.
pub const START_RADIUS: f64 = 1e-6;
/// Local relative tolerance of the radial integration.
pub const RADIAL_RTOL: f64 = 1e-10;

/// One partial wave.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RadialChannel {
    pub kappa: i32,
    pub degeneracy: usize,
    pub l_upper: u32,
    pub l_lower: u32,
}

impl RadialChannel {
    pub fn new(kappa: i32) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::ValidationError("channel index kappa must be nonzero".into()));
        }
        let (l_upper, l_lower) = if kappa > 0 {
            (kappa as u32, (kappa - 1) as u32)
        } else {
            ((-kappa - 1) as u32, (-kappa) as u32)
        };
        Ok(RadialChannel { kappa, degeneracy: 2 * kappa.unsigned_abs() as usize, l_upper, l_lower })
    }

    fn sign(&self) -> f64 {
        if self.kappa > 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Channels `kappa = -1, 1, -2, 2, ..., -kappa_max, kappa_max`.
pub fn radial_reduce(v: &MatrixPotential, kappa_max: u32) -> Result<Vec<RadialChannel>> {
    if v.channel != Channel::ElectricI4 {
        return Err(Error::UnsupportedChannel(format!("{:?}", v.channel)));
    }
    let mut out = Vec::with_capacity(2 * kappa_max as usize);
    for k in 1..=kappa_max as i32 {
        out.push(RadialChannel::new(-k)?);
        out.push(RadialChannel::new(k)?);
    }
    Ok(out)
}

/// Spherical Hankel functions `h_0^(1)(z), ..., h_n^(1)(z)` by upward recurrence.
pub fn spherical_hankel1(n: u32, z: Complex64) -> Vec<Complex64> {
    let i = Complex64::i();
    let e = (i * z).exp();
    let mut h = Vec::with_capacity(n as usize + 1);
    h.push(-i * e / z);
    if n >= 1 {
        h.push(-e * (z + i) / (z * z));
    }
    for l in 1..n as usize {
        let next = h[l] * ((2 * l + 1) as f64) / z - h[l - 1];
        h.push(next);
    }
    h
}

/// Jost function value with bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct JostSample {
    pub sp: SpectralParameter,
    pub channel: RadialChannel,
    pub jost_value: Complex64,
    pub steps: usize,
}

/// `(2n - 1)!! / k^n` as a running product, free of intermediate overflow.
fn double_factorial_over_power(n: u32, k: Complex64) -> Complex64 {
    (0..n).fold(Complex64::new(1.0, 0.0), |acc, m| acc * ((2 * m + 1) as f64) / k)
}

/// Regular solution `(G, F)` at `r1` for the radial profile `v`, scaled so
/// that the leading power at the origin has unit coefficient.
pub fn regular_solution(
    channel: RadialChannel,
    lambda: Complex64,
    v: &dyn Fn(f64) -> f64,
    r1: f64,
) -> Result<([Complex64; 2], usize)> {
    let kap = channel.kappa as f64;
    let eps = START_RADIUS;
    let v0 = v(0.0);
    let one = Complex64::new(1.0, 0.0);
    let ka = kap.abs();
    // The state is integrated with the factor r^|kappa| divided out, which
    // keeps high partial waves bounded; it is restored at the end.
    let y0 = if channel.kappa < 0 {
        [one, -(lambda - 1.0 - v0) / (2.0 * ka + 1.0) * eps]
    } else {
        [(lambda + 1.0 - v0) / (2.0 * ka + 1.0) * eps, one]
    };
    let rhs = |r: f64, y: &[Complex64; 2]| {
        let vr = v(r);
        [
            -((kap + ka) / r) * y[0] + (lambda + 1.0 - vr) * y[1],
            ((kap - ka) / r) * y[1] - (lambda - 1.0 - vr) * y[0],
        ]
    };
    let (y, stats) = integrate(rhs, eps, r1, y0, RADIAL_RTOL, 1e-300, 2_000_000).map_err(|e| {
        Error::StiffIntegration(match e {
            OdeFailure::StepUnderflow { at } => format!("step size underflow at r = {at}"),
            OdeFailure::TooManySteps { at } => format!("step budget exhausted at r = {at}"),
            OdeFailure::NonFinite { at } => format!("non-finite state at r = {at}"),
        })
    })?;
    let scale = r1.powf(ka);
    Ok(([y[0] * scale, y[1] * scale], stats.accepted + stats.rejected))
}

/// Jost function of `channel` at `sp` for the profile `v` supported in `r < r0`.
pub fn jost_function(
    channel: RadialChannel,
    sp: &SpectralParameter,
    v: &dyn Fn(f64) -> f64,
    r0: f64,
) -> Result<JostSample> {
    if !(r0 > 0.0) {
        return Err(Error::NonPositiveRadius(r0));
    }
    let lambda = sp.lambda;
    let k = sp.kappa;
    let (u, steps) = regular_solution(channel, lambda, v, r0)?;
    let lu = channel.l_upper;
    let ll = channel.l_lower;
    let h = spherical_hankel1(lu.max(ll), k * r0);
    let s = channel.sign();
    let hg = h[lu as usize] * r0;
    let hf = h[ll as usize] * r0 * (s * k / (lambda + 1.0));
    let w = u[0] * hf - u[1] * hg;
    let norm = if channel.kappa < 0 {
        double_factorial_over_power(lu, k) * (2 * lu + 1) as f64
    } else {
        let kk = channel.kappa as u32;
        (lambda + 1.0) * double_factorial_over_power(kk, k)
    };
    let w_free = Complex64::i() / (k * (lambda + 1.0));
    Ok(JostSample { sp: *sp, channel, jost_value: w / (norm * w_free), steps })
}

/// Jost function for the radial factor of an electric potential.
pub fn jost_for_potential(channel: RadialChannel, sp: &SpectralParameter, v: &MatrixPotential) -> Result<JostSample> {
    if v.channel != Channel::ElectricI4 {
        return Err(Error::UnsupportedChannel(format!("{:?}", v.channel)));
    }
    let f = |r: f64| v.radial(r);
    jost_function(channel, sp, &f, v.r0())
}

/// Channel scattering coefficient `S_kappa(lambda) = J(lambda, -k) / J(lambda, k)`
/// at real `|lambda| > 1` (boundary value from above).
pub fn channel_s_matrix(channel: RadialChannel, lambda: f64, v: &MatrixPotential) -> Result<Complex64> {
    let p = SpectralParameter::real(lambda, Sheet::Physical)?;
    let jp = jost_for_potential(channel, &p, v)?.jost_value;
    let js = jost_for_potential(channel, &p.flipped(), v)?.jost_value;
    Ok(js / jp)
}

/// `s(lambda) = prod_kappa S_kappa(lambda)^{2|kappa|}` over `|kappa| <= kappa_max`
/// at real `|lambda| > 1`.
pub fn radial_scattering_determinant(v: &MatrixPotential, lambda: f64, kappa_max: u32) -> Result<LogDet> {
    let mut s = LogDet::ONE;
    for channel in radial_reduce(v, kappa_max)? {
        let d = LogDet::from_complex(channel_s_matrix(channel, lambda, v)?);
        let deg = channel.degeneracy as f64;
        s = s.mul(LogDet { log_abs: d.log_abs * deg, arg: crate::linalg::wrap_angle(d.arg * deg) });
    }
    Ok(s)
}

/// Largest `|kappa|` with a non-negligible phase at real energy `lambda`:
/// beyond the turning point `l ≈ k r0` the phase shift decays like
/// `exp(-2 l (acosh(l / k r0) - (1 - (k r0 / l)²)^{1/2}))`.
pub fn partial_wave_cutoff(lambda: f64, r0: f64) -> u32 {
    let k = (lambda * lambda - 1.0).max(0.0).sqrt();
    (1.3 * k * r0 + 15.0).ceil() as u32
}

/// Spectral shift curve of the partial-wave model at the energies
/// `lambdas` (refined where any channel phase moves fast), with each channel
/// phase unwrapped separately before weighting by its degeneracy. Channels
/// above [`partial_wave_cutoff`] at a given energy count as `S_kappa = 1`.
pub fn radial_shift_curve(
    v: &MatrixPotential,
    lambdas: &[f64],
    kappa_max: u32,
    max_refine: usize,
) -> Result<Vec<ShiftPoint>> {
    let channels = radial_reduce(v, kappa_max)?;
    let weights: Vec<f64> = channels.iter().map(|c| c.degeneracy as f64).collect();
    let sample = |l: f64| -> Result<Vec<LogDet>> {
        let active = partial_wave_cutoff(l, v.r0());
        channels
            .iter()
            .map(|&c| {
                if c.kappa.unsigned_abs() > active {
                    Ok(LogDet::ONE)
                } else {
                    channel_s_matrix(c, l, v).map(LogDet::from_complex)
                }
            })
            .collect()
    };
    spectral_shift_curve_factored(&sample, &weights, lambdas, max_refine)
}

/// Jost function of one channel as a search target on a fixed sheet.
pub fn jost_detfn<'a>(
    channel: RadialChannel,
    sheet: Sheet,
    v: &'a MatrixPotential,
) -> impl Fn(Complex64) -> Result<LogDet> + Sync + 'a {
    move |lambda: Complex64| {
        let sp = SpectralParameter::new(lambda, sheet)?;
        Ok(LogDet::from_complex(jost_for_potential(channel, &sp, v)?.jost_value))
    }
}

/// Second-sheet zeros of the Jost functions of channels `|kappa| <= kappa_max`
/// in `region`, each with multiplicity `(zero order) * 2|kappa|`, merged and
/// sorted.
pub fn radial_resonances(v: &MatrixPotential, region: &Rect, kappa_max: u32, opts: &SearchOptions) -> Result<Vec<Resonance>> {
    let mut out = Vec::new();
    for channel in radial_reduce(v, kappa_max)? {
        let f = jost_detfn(channel, Sheet::Second, v);
        let found = find_zeros(&f, region, Sheet::Second, Method::RadialOracle, opts)?;
        out.extend(found.zeros.into_iter().map(|mut z| {
            z.multiplicity *= channel.degeneracy;
            z.flags.push(format!("kappa={}", channel.kappa));
            z
        }));
    }
    sort_zeros(&mut out);
    Ok(out)
}

/// Physical-sheet eigenvalues in `interval` (inside the gap) of channels
/// `|kappa| <= kappa_max`, with multiplicity `2|kappa|` per simple zero.
pub fn radial_bound_states(
    v: &MatrixPotential,
    interval: [f64; 2],
    kappa_max: u32,
    samples: usize,
    opts: &SearchOptions,
) -> Result<Vec<Resonance>> {
    let mut out = Vec::new();
    for channel in radial_reduce(v, kappa_max)? {
        let f = jost_detfn(channel, Sheet::Physical, v);
        let found = find_real_zeros(&f, interval, samples, Sheet::Physical, Method::RadialOracle, opts)?;
        out.extend(found.into_iter().map(|mut z| {
            z.multiplicity *= channel.degeneracy;
            z.flags.push(format!("kappa={}", channel.kappa));
            z
        }));
    }
    sort_zeros(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_quantum_numbers() {
        let c = RadialChannel::new(-1).unwrap();
        assert_eq!((c.l_upper, c.l_lower, c.degeneracy), (0, 1, 2));
        let c = RadialChannel::new(2).unwrap();
        assert_eq!((c.l_upper, c.l_lower, c.degeneracy), (2, 1, 4));
        assert!(RadialChannel::new(0).is_err());
    }

    #[test]
    fn reduce_counts() {
        let v = MatrixPotential::electric(2.0, 1.0).unwrap();
        let ch = radial_reduce(&v, 2).unwrap();
        assert_eq!(ch.iter().map(|c| c.degeneracy).collect::<Vec<_>>(), vec![2, 2, 4, 4]);
        let b = MatrixPotential::scalar_beta(2.0, 1.0).unwrap();
        assert!(matches!(radial_reduce(&b, 2), Err(Error::UnsupportedChannel(_))));
    }

    #[test]
    fn hankel_low_orders() {
        let z = Complex64::new(1.3, -0.4);
        let h = spherical_hankel1(3, z);
        // h_2 = (3/z^2 - 1) h_0 ... check via the closed form e^{iz}(-i/z)(1 + 3i/z - 3/z^2)
        let i = Complex64::i();
        let h2 = (i * z).exp() * (-i / z) * (1.0 + 3.0 * i / z - 3.0 / (z * z)) * -1.0;
        assert!((h[2] - h2).norm() < 1e-12 * h2.norm(), "{} {}", h[2], h2);
    }
}
