//! The Lamé equation `φ'' = 6(C3 + ℘(z; 0, g3))φ` on a real interval free of poles.

use crate::error::{Error, Result};
use crate::special::ode::{integrate, Tolerance};
use crate::special::wp::{real_period, wp, wp_derivatives};

const CHECKPOINT_SPACING: f64 = 0.05;
const POLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct LameSolution {
    pub g3: f64,
    pub c3: f64,
    pub range: (f64, f64),
    /// Sorted `(z, φ, φ')` samples along the range.
    checkpoints: Vec<(f64, f64, f64)>,
}

fn rhs(g3: f64, c3: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |z, y| {
        let p = wp(z, g3).map(|v| v.0).unwrap_or(f64::NAN);
        [y[1], 6.0 * (c3 + p) * y[0]]
    }
}

fn tol() -> Tolerance {
    Tolerance { rtol: 1e-13, atol: 1e-15 }
}

/// First real pole of ℘ inside `[a, b]` widened by the margin.
pub(crate) fn pole_in(a: f64, b: f64, g3: f64) -> Option<f64> {
    let t = real_period(g3);
    let (lo, hi) = (a - POLE_MARGIN, b + POLE_MARGIN);
    if t.is_infinite() {
        return (lo <= 0.0 && 0.0 <= hi).then_some(0.0);
    }
    let k = (lo / t).ceil();
    let p = k * t;
    (p <= hi).then_some(p)
}

/// Integrate the Lamé equation over `range` from the data `ic = (φ, φ')` at `z0`.
pub fn lame_solve(g3: f64, c3: f64, range: (f64, f64), z0: f64, ic: (f64, f64)) -> Result<LameSolution> {
    let (a, b) = range;
    if !(a < b) || !(a..=b).contains(&z0) || ![g3, c3, ic.0, ic.1].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("lame: need a < b, z0 in range and finite data".into()));
    }
    if let Some(p) = pole_in(a, b, g3) {
        return Err(Error::PoleInRange(p));
    }
    let f = rhs(g3, c3);
    let mut fwd = vec![(z0, ic.0, ic.1)];
    let mut z = z0;
    let mut y = [ic.0, ic.1];
    while z < b {
        let zn = (z + CHECKPOINT_SPACING).min(b);
        y = integrate(&f, z, y, zn, tol())?;
        z = zn;
        fwd.push((z, y[0], y[1]));
    }
    let mut back = Vec::new();
    let mut z = z0;
    let mut y = [ic.0, ic.1];
    while z > a {
        let zn = (z - CHECKPOINT_SPACING).max(a);
        y = integrate(&f, z, y, zn, tol())?;
        z = zn;
        back.push((z, y[0], y[1]));
    }
    back.reverse();
    back.extend(fwd);
    Ok(LameSolution { g3, c3, range, checkpoints: back })
}

impl LameSolution {
    /// `φ, φ', φ'', φ'''` at `z`; the higher derivatives come from the equation itself.
    pub fn eval(&self, z: f64) -> Result<[f64; 4]> {
        let (a, b) = self.range;
        if !(a - 1e-12..=b + 1e-12).contains(&z) {
            return Err(Error::InvalidInput(format!("lame: z = {z} outside the integration range [{a}, {b}]")));
        }
        let i = self.checkpoints.partition_point(|c| c.0 <= z);
        let near = if i == 0 {
            self.checkpoints[0]
        } else if i == self.checkpoints.len() {
            self.checkpoints[i - 1]
        } else {
            let (l, r) = (self.checkpoints[i - 1], self.checkpoints[i]);
            if z - l.0 <= r.0 - z {
                l
            } else {
                r
            }
        };
        let y = integrate(rhs(self.g3, self.c3), near.0, [near.1, near.2], z, tol())?;
        let w = wp_derivatives(z, self.g3)?;
        let k = 6.0 * (self.c3 + w[0]);
        Ok([y[0], y[1], k * y[0], 6.0 * w[1] * y[0] + k * y[1]])
    }
}
