//! Adaptive Dormand–Prince 5(4) integrator for small complex linear systems.

use num_complex::Complex64;

/// Outcome of an integration.
#[derive(Clone, Copy, Debug)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Why an integration stopped early.
#[derive(Clone, Debug)]
pub enum OdeFailure {
    StepUnderflow { at: f64 },
    TooManySteps { at: f64 },
    NonFinite { at: f64 },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` for a two-component complex state from `t0` to
/// `t1`. The local error is measured in the Euclidean norm of the state,
/// relative to the state's size (`rtol`) with absolute floor `atol`.
pub fn integrate<F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: [Complex64; 2],
    rtol: f64,
    atol: f64,
    max_steps: usize,
) -> Result<([Complex64; 2], OdeStats), OdeFailure>
where
    F: Fn(f64, &[Complex64; 2]) -> [Complex64; 2],
{
    let mut t = t0;
    let mut y = y0;
    let span = t1 - t0;
    let mut h = span * 1e-3;
    let mut stats = OdeStats { accepted: 0, rejected: 0 };
    let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
    k[0] = f(t, &y);
    while (t1 - t) > 1e-15 * span.abs().max(1.0) {
        if stats.accepted + stats.rejected >= max_steps {
            return Err(OdeFailure::TooManySteps { at: t });
        }
        if h > t1 - t {
            h = t1 - t;
        }
        if h < 1e-14 * span.abs() {
            return Err(OdeFailure::StepUnderflow { at: t });
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, a) in A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    ys[0] += k[j][0] * (h * a);
                    ys[1] += k[j][1] * (h * a);
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut ynew = y;
        let mut err = [Complex64::new(0.0, 0.0); 2];
        for s in 0..7 {
            ynew[0] += k[s][0] * (h * B[s]);
            ynew[1] += k[s][1] * (h * B[s]);
            err[0] += k[s][0] * (h * E[s]);
            err[1] += k[s][1] * (h * E[s]);
        }
        let size = norm2(&y).max(norm2(&ynew));
        let sc = atol + rtol * size;
        let en = norm2(&err) / sc;
        if !en.is_finite() || !size.is_finite() {
            return Err(OdeFailure::NonFinite { at: t });
        }
        if en <= 1.0 {
            t += h;
            y = ynew;
            k[0] = k[6];
            stats.accepted += 1;
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok((y, stats))
}

fn norm2(y: &[Complex64; 2]) -> f64 {
    (y[0].norm_sqr() + y[1].norm_sqr()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y0' = y1, y1' = -y0 with complex frequency scaling
        let w = Complex64::new(1.3, 0.2);
        let f = |_t: f64, y: &[Complex64; 2]| [y[1] * w, -y[0] * w];
        let (y, _) = integrate(f, 0.0, 2.0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], 1e-11, 1e-300, 100_000).unwrap();
        let exact = (w * 2.0).cos();
        assert!((y[0] - exact).norm() < 1e-9);
    }
}
