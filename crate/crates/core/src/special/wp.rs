//! Weierstrass ℘ with invariants `(0, g3)` on the real axis.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Real period of ℘(·; 0, 1).
const PERIOD_POS: f64 = 3.059_908_074_114_385_3;
/// Real period of ℘(·; 0, −1), equal to √3 · PERIOD_POS.
const PERIOD_NEG: f64 = 5.299_916_250_856_349_6;
/// Distance from 0 to the nearest other lattice point, for `|g3| = 1` and either sign.
const NEAREST_POLE: f64 = PERIOD_POS;

const LAURENT_TERMS: usize = 40;

/// Laurent coefficients `c_k` for `g3 = 1`: ℘ = z⁻² + Σ c_k z^(2k−2).
fn unit_coefficients() -> &'static [f64; LAURENT_TERMS] {
    static C: OnceLock<[f64; LAURENT_TERMS]> = OnceLock::new();
    C.get_or_init(|| {
        let mut c = [0.0; LAURENT_TERMS];
        c[3] = 1.0 / 28.0;
        for k in 4..LAURENT_TERMS {
            let s: f64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
            c[k] = 3.0 * s / ((2 * k + 1) as f64 * (k - 3) as f64);
        }
        c
    })
}

/// Real period of ℘(·; 0, g3), or infinity when `g3 = 0`.
pub fn real_period(g3: f64) -> f64 {
    if g3 == 0.0 {
        return f64::INFINITY;
    }
    let base = if g3 > 0.0 { PERIOD_POS } else { PERIOD_NEG };
    base * g3.abs().powf(-1.0 / 6.0)
}

fn laurent(z: f64, g3: f64) -> (f64, f64) {
    let c = unit_coefficients();
    let (mut p, mut dp) = (z.powi(-2), -2.0 * z.powi(-3));
    // c_k scales like g3^(k/3); only k ≡ 0 mod 3 is nonzero.
    let mut k = 3;
    while k < LAURENT_TERMS {
        let ck = c[k] * g3.powi((k / 3) as i32);
        let e = (2 * k - 2) as i32;
        p += ck * z.powi(e);
        dp += ck * e as f64 * z.powi(e - 1);
        k += 3;
    }
    (p, dp)
}

/// Distance from `z` to the nearest real pole.
pub fn pole_distance(z: f64, g3: f64) -> f64 {
    let t = real_period(g3);
    if t.is_infinite() {
        return z.abs();
    }
    let r = z.rem_euclid(t);
    r.min(t - r)
}

/// ℘(z; 0, g3) and its derivative.
pub fn wp(z: f64, g3: f64) -> Result<(f64, f64)> {
    if !z.is_finite() || !g3.is_finite() {
        return Err(Error::InvalidInput("non-finite argument to wp".into()));
    }
    if pole_distance(z, g3) < 1e-6 {
        return Err(Error::NearPole(z));
    }
    if g3 == 0.0 {
        return Ok((z.powi(-2), -2.0 * z.powi(-3)));
    }
    let t = real_period(g3);
    let mut zr = z.rem_euclid(t);
    if zr > 0.5 * t {
        zr -= t;
    }
    let radius = 0.5 * NEAREST_POLE * g3.abs().powf(-1.0 / 6.0);
    let mut n = 0;
    let mut w = zr;
    while w.abs() > radius {
        w *= 0.5;
        n += 1;
    }
    let (mut p, mut dp) = laurent(w, g3);
    for _ in 0..n {
        // ℘(2w) = −2℘ + (℘'')²/(4℘'²) with ℘'' = 6℘².
        let p2 = p * p;
        let p3 = p2 * p;
        let np = -2.0 * p + 9.0 * p2 * p2 / (dp * dp);
        let ndp = -dp + 18.0 * p3 / dp - 54.0 * p3 * p3 / (dp * dp * dp);
        p = np;
        dp = ndp;
    }
    Ok((p, dp))
}

/// ℘, ℘', ℘'' and ℘''' at `z`.
pub fn wp_derivatives(z: f64, g3: f64) -> Result<[f64; 4]> {
    let (p, dp) = wp(z, g3)?;
    Ok([p, dp, 6.0 * p * p, 12.0 * p * dp])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_examples() {
        assert_eq!(wp(2.0, 0.0).unwrap().0, 0.25);
        assert_eq!(wp(0.5, 0.0).unwrap().0, 4.0);
        assert!(matches!(wp(1e-8, 0.0), Err(Error::NearPole(_))));
    }

    #[test]
    fn ode_residual() {
        for &g3 in &[-4.0, 1.0, 4.0, 0.3] {
            let t = real_period(g3);
            for k in 1..60 {
                let z = -1.7 * t + 3.4 * t * k as f64 / 60.0;
                if pole_distance(z, g3) < 0.05 {
                    continue;
                }
                let (p, dp) = wp(z, g3).unwrap();
                let r = dp * dp - 4.0 * p * p * p + g3;
                assert!(r.abs() <= 1e-8 * (1.0 + 4.0 * p.abs().powi(3)), "g3={g3} z={z} r={r}");
            }
        }
    }

    #[test]
    fn periodic_and_even() {
        let g3 = 4.0;
        let t = real_period(g3);
        let (a, da) = wp(0.3, g3).unwrap();
        let (b, db) = wp(0.3 + t, g3).unwrap();
        let (c, dc) = wp(-0.3, g3).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs() && (a - c).abs() < 1e-12 * a.abs());
        assert!((da - db).abs() < 1e-9 * da.abs() && (da + dc).abs() < 1e-12 * da.abs());
        assert!(matches!(wp(t, g3), Err(Error::NearPole(_))));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g3 = -2.5;
        let z = 1.3;
        let h = 1e-5;
        let fd = (wp(z + h, g3).unwrap().0 - wp(z - h, g3).unwrap().0) / (2.0 * h);
        assert!((fd - wp(z, g3).unwrap().1).abs() < 1e-7);
    }
}
