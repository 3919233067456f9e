//! The confluent Heun function as the solution of the Cauchy problem
//!
//! ```text
//! z(z−1)Y'' + (αz(z−1) + (β+1)(z−1) + (γ+1)z)Y'
//!     + ½(α(β+1)(z−1) + α(γ+1)z + 2δz + (β+1)(γ+1) + 2η − 1)Y = 0,
//! Y(0) = 1,  Y'(0) = ½((2η−1)/(β+1) + γ + 1 − α).
//! ```
//!
//! Near `z = 0` the regular power series is summed directly; farther out the equation is
//! integrated from series data at `|z| = 0.5`.

use crate::error::{Error, Result};
use crate::special::ode::{integrate, Tolerance};

const SERIES_RADIUS: f64 = 0.5;
const MAX_TERMS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeunParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
}

impl HeunParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, eta: f64) -> HeunParams {
        HeunParams { alpha, beta, gamma, delta, eta }
    }

    /// Constant and linear parts of the `Y` coefficient.
    fn y_coeff(&self) -> (f64, f64) {
        let HeunParams { alpha, beta, gamma, delta, eta } = *self;
        let c0 = 0.5 * ((beta + 1.0) * (gamma + 1.0) + 2.0 * eta - 1.0 - alpha * (beta + 1.0));
        let c1 = 0.5 * (alpha * (beta + 1.0) + alpha * (gamma + 1.0) + 2.0 * delta);
        (c0, c1)
    }

    /// Coefficients `(p, q)` of `z(z−1)Y'' + p Y' + q Y = 0`.
    fn pq(&self, z: f64) -> (f64, f64) {
        let HeunParams { alpha, beta, gamma, .. } = *self;
        let (c0, c1) = self.y_coeff();
        (alpha * z * (z - 1.0) + (beta + 1.0) * (z - 1.0) + (gamma + 1.0) * z, c0 + c1 * z)
    }

    /// `Y'(0)` from the initial data.
    pub fn initial_slope(&self) -> f64 {
        0.5 * ((2.0 * self.eta - 1.0) / (self.beta + 1.0) + self.gamma + 1.0 - self.alpha)
    }

    /// Residual of the equation for given `Y, Y', Y''` at `z`.
    pub fn residual(&self, z: f64, y: [f64; 3]) -> f64 {
        let (p, q) = self.pq(z);
        z * (z - 1.0) * y[2] + p * y[1] + q * y[0]
    }

    fn validate(&self) -> Result<()> {
        let HeunParams { alpha, beta, gamma, delta, eta } = *self;
        if ![alpha, beta, gamma, delta, eta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("heun: non-finite parameter".into()));
        }
        // The series denominators (k+1)(k+β+1) vanish for β = −1, −2, …
        if beta <= -1.0 && beta.fract() == 0.0 {
            return Err(Error::ParameterPole(format!("beta = {beta}")));
        }
        Ok(())
    }

    fn series(&self, z: f64) -> [f64; 3] {
        let HeunParams { alpha, beta, gamma, .. } = *self;
        let (c0, c1) = self.y_coeff();
        let mut prev = 1.0;
        let mut cur = c0 / (beta + 1.0);
        let mut s = [1.0, 0.0, 0.0];
        let mut zk = 1.0; // z^(k−1) while adding term k
        let mut zk1 = 0.0; // z^(k−2)
        let mut small = 0;
        for k in 1..MAX_TERMS {
            let kf = k as f64;
            let t0 = cur * zk * z;
            s[0] += t0;
            s[1] += kf * cur * zk;
            s[2] += kf * (kf - 1.0) * cur * zk1;
            let next = (cur * (kf * (kf - 1.0) + (beta + gamma + 2.0 - alpha) * kf + c0) + prev * (alpha * (kf - 1.0) + c1))
                / ((kf + 1.0) * (kf + beta + 1.0));
            prev = cur;
            cur = next;
            zk1 = zk;
            zk *= z;
            let mag = (cur * zk * z).abs() + (cur * zk).abs() * (kf + 1.0);
            if mag < 1e-18 * (1.0 + s[0].abs() + s[1].abs()) {
                small += 1;
                if small > 3 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        s
    }

    /// `Y, Y', Y''` at `z`.
    pub fn eval(&self, z: f64) -> Result<[f64; 3]> {
        self.validate()?;
        if !z.is_finite() {
            return Err(Error::InvalidInput("heun: non-finite argument".into()));
        }
        if z >= 1.0 - 1e-3 {
            return Err(Error::SingularPath(format!("path from 0 to {z} meets the singular point z = 1")));
        }
        if z.abs() <= SERIES_RADIUS {
            return Ok(self.series(z));
        }
        let z0 = SERIES_RADIUS * z.signum();
        let seed = self.series(z0);
        let f = |x: f64, y: &[f64; 2]| {
            let (p, q) = self.pq(x);
            [y[1], -(p * y[1] + q * y[0]) / (x * (x - 1.0))]
        };
        let y = integrate(f, z0, [seed[0], seed[1]], z, Tolerance { rtol: 1e-13, atol: 1e-15 })?;
        let (p, q) = self.pq(z);
        Ok([y[0], y[1], -(p * y[1] + q * y[0]) / (z * (z - 1.0))])
    }
}

/// `HeunC(α, β, γ, δ, η, z)`.
pub fn heun_c(alpha: f64, beta: f64, gamma: f64, delta: f64, eta: f64, z: f64) -> Result<f64> {
    Ok(HeunParams::new(alpha, beta, gamma, delta, eta).eval(z)?[0])
}
