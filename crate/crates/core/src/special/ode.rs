//! Adaptive Dormand–Prince 5(4) integration for small real systems.

use crate::error::{Error, Result};

const MAX_STEPS: usize = 200_000;

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
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, atol: 1e-14 }
    }
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction).
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x1: f64,
    tol: Tolerance,
) -> Result<[f64; N]> {
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = dir * (span.abs() / 16.0).min(0.05);
    let min_h = (1e-14 * (1.0 + x0.abs().max(x1.abs()))).min(1e-6 * span.abs());
    for step in 0..MAX_STEPS {
        if (x1 - x) * dir <= 0.0 {
            return Ok(y);
        }
        let last = (x + h - x1) * dir >= 0.0;
        if last {
            h = x1 - x;
        }
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, a) in A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * k[j][i];
                    }
                }
            }
            k[s] = f(x + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let sc = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / sc);
        }
        if !err.is_finite() {
            h *= 0.25;
        } else if err <= 1.0 {
            y = y5;
            if last {
                return Ok(y);
            }
            x += h;
            h *= (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.1);
        }
        if h.abs() < min_h {
            return Err(Error::NoConvergence(step));
        }
    }
    Err(Error::NoConvergence(MAX_STEPS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let y = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 3.0, Tolerance::default()).unwrap();
        assert!((y[0] - 3f64.sin()).abs() < 1e-11);
        let back = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 3.0, y, 0.0, Tolerance::default()).unwrap();
        assert!(back[0].abs() < 1e-11 && (back[1] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn blow_up_is_reported() {
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, Tolerance::default());
        assert!(r.is_err());
    }
}
