//! Reductions of the Burgers system by one- and two-dimensional subalgebras.
//!
//! Each ansatz expresses `(u, v)` through two functions of invariant variables:
//! `w¹, w²` of `(z₁, z₂)` for the ansatzes 1.1–1.8, or `φ¹, φ²` of `ω` for 2.1–2.6.
//! Reduced functions are represented by jets whose slots 0 and 1 hold `z₁` and `z₂`
//! (slot 0 holds `ω`).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog;
use crate::error::{Error, Result};
use crate::fields::{burgers_residual_at, FieldHandle, FnField, Point};
use crate::heat_kit::HeatSolution1D;
use crate::jet::Jet;
use crate::lie_algebra::{find_subalgebra, SubalgebraParams};
use crate::special::ode::{integrate, Tolerance};

/// Tolerance for both sides of the full/reduced equivalence.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnsatzId {
    #[serde(rename = "1.1")]
    A11,
    #[serde(rename = "1.2")]
    A12,
    #[serde(rename = "1.3")]
    A13,
    #[serde(rename = "1.4")]
    A14,
    #[serde(rename = "1.5")]
    A15,
    #[serde(rename = "1.6")]
    A16,
    #[serde(rename = "1.7")]
    A17,
    #[serde(rename = "1.8")]
    A18,
    #[serde(rename = "2.1")]
    A21,
    #[serde(rename = "2.2")]
    A22,
    #[serde(rename = "2.3")]
    A23,
    #[serde(rename = "2.4")]
    A24,
    #[serde(rename = "2.5")]
    A25,
    #[serde(rename = "2.6")]
    A26,
}

use AnsatzId::*;

impl AnsatzId {
    pub const ALL: [AnsatzId; 14] = [A11, A12, A13, A14, A15, A16, A17, A18, A21, A22, A23, A24, A25, A26];

    pub fn label(self) -> &'static str {
        match self {
            A11 => "1.1",
            A12 => "1.2",
            A13 => "1.3",
            A14 => "1.4",
            A15 => "1.5",
            A16 => "1.6",
            A17 => "1.7",
            A18 => "1.8",
            A21 => "2.1",
            A22 => "2.2",
            A23 => "2.3",
            A24 => "2.4",
            A25 => "2.5",
            A26 => "2.6",
        }
    }

    /// Reduction to two independent variables (as opposed to an ODE in `ω`).
    pub fn is_pde(self) -> bool {
        self.label().starts_with('1')
    }

    /// Identifier of the subalgebra in [`crate::lie_algebra`].
    pub fn subalgebra_id(self) -> String {
        format!("g{}", self.label())
    }
}

impl fmt::Display for AnsatzId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AnsatzId {
    type Err = Error;
    fn from_str(s: &str) -> Result<AnsatzId> {
        let s = s.strip_prefix('g').unwrap_or(s);
        AnsatzId::ALL
            .into_iter()
            .find(|a| a.label() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown ansatz {s}")))
    }
}

/// An ansatz with its parameters. `t_sign` selects the half-line `sgn t = t_sign` for the
/// ansatzes 1.3 and 2.3, which involve `|t|`; it is 1 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ansatz {
    pub id: AnsatzId,
    pub kappa: f64,
    pub mu: f64,
    pub t_sign: f64,
}

/// Rotation of `(a, b)` by the angle `tau`.
fn rotate(a: Jet, b: Jet, tau: Jet) -> (Jet, Jet) {
    let (c, s) = (tau.cos(), tau.sin());
    (a * c - b * s, a * s + b * c)
}

fn tan(j: Jet) -> Jet {
    let t = j.v.tan();
    let sec2 = 1.0 + t * t;
    j.chain(t, sec2, 2.0 * sec2 * t)
}

fn radius(x: Jet, y: Jet) -> Jet {
    (x * x + y * y).sqrt()
}

impl Ansatz {
    pub fn new(id: AnsatzId, kappa: f64, mu: f64) -> Result<Ansatz> {
        Ansatz::with_t_sign(id, kappa, mu, 1.0)
    }

    pub fn with_t_sign(id: AnsatzId, kappa: f64, mu: f64, t_sign: f64) -> Result<Ansatz> {
        let a = Ansatz { id, kappa, mu, t_sign };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::ParameterOutOfDomain(format!("ansatz {}: {what}", self.id)));
        if !(self.kappa.is_finite() && self.mu.is_finite()) {
            return bad("non-finite parameter");
        }
        if self.t_sign != 1.0 && self.t_sign != -1.0 {
            return bad("t_sign must be 1 or -1");
        }
        if self.t_sign == -1.0 && !matches!(self.id, A13 | A23) {
            return bad("only 1.3 and 2.3 admit t < 0");
        }
        match self.id {
            A11 if self.kappa != 0.0 && self.kappa != 1.0 => bad("kappa in {0,1}"),
            A13 | A14 | A21 if self.kappa < 0.0 => bad("kappa >= 0"),
            A15 | A26 if self.mu <= 0.0 => bad("mu > 0"),
            A25 if self.mu < 0.0 => bad("mu >= 0"),
            _ => Ok(()),
        }
    }

    pub fn subalgebra_params(&self) -> SubalgebraParams {
        SubalgebraParams { kappa: self.kappa, mu: self.mu, nu: 0.0 }
    }

    /// Coordinates of the subalgebra basis in `(P^t, D, Π, J, P^x, P^y, G^x, G^y)`.
    pub fn generators(&self) -> Result<Vec<[f64; 8]>> {
        find_subalgebra(&self.id.subalgebra_id())?.coordinates(&self.subalgebra_params())
    }

    /// `(κ, α, β)` of the common form
    /// `wⁱw¹ᵢ − w¹ᵢᵢ − 2κw² + αz₁ = 0`, `wⁱw²ᵢ − w²ᵢᵢ + 2κw¹ + αz₂ + β = 0` of the systems 1.1–1.5.
    pub fn grouped(&self) -> Option<(f64, f64, f64)> {
        let k = self.kappa;
        match self.id {
            A11 => Some((k, -k, 0.0)),
            A12 => Some((0.0, 0.0, 1.0)),
            A13 => Some((k * self.t_sign, -(k * k + 0.25), 0.0)),
            A14 => Some((k, 1.0 - k * k, 0.0)),
            A15 => Some((1.0, 0.0, 2.0 * self.mu)),
            _ => None,
        }
    }

    /// `|t|` for the ansatzes with a declared sign of `t`.
    fn abs_t(&self, t: Jet) -> Jet {
        t * self.t_sign
    }

    pub fn is_singular(&self, p: &Point) -> bool {
        let r2 = p.x * p.x + p.y * p.y;
        match self.id {
            A13 | A23 => !(p.t * self.t_sign > 0.0) || (self.id == A23 && r2 == 0.0),
            A16 | A22 | A24 => r2 == 0.0,
            A21 => !(p.x > 0.0),
            _ => false,
        }
    }

    /// Invariant variables as jets in `(t, x, y)`; for the ODE ansatzes the second entry is zero.
    pub fn invariants(&self, c: &[Jet; 3]) -> [Jet; 2] {
        let [t, x, y] = *c;
        let (k, mu) = (self.kappa, self.mu);
        let one = t * t + 1.0;
        match self.id {
            A11 => {
                let (a, b) = rotate(x, y, t * -k);
                [a, b]
            }
            A12 => [x, y - t * t * 0.5],
            A13 => {
                let at = self.abs_t(t);
                let (a, b) = rotate(x, y, at.ln() * -k);
                let s = at.sqrt();
                [a / s, b / s]
            }
            A14 => {
                let (a, b) = rotate(x, y, t.atan() * -k);
                let q = one.sqrt();
                [a / q, b / q]
            }
            A15 => [(t * x - y) / one - t.atan() * mu, (x + t * y) / one],
            A16 => [t, radius(x, y)],
            A17 => [t.atan(), (x + t * y) / one],
            A18 => [t, x],
            A21 => [y.atan2(&x) - (x * x + y * y).ln() * (0.5 * k), Jet::ZERO],
            A22 => [radius(x, y), Jet::ZERO],
            A23 => [radius(x, y) / self.abs_t(t).sqrt(), Jet::ZERO],
            A24 => [radius(x, y) / one.sqrt(), Jet::ZERO],
            A25 => [(x + t * y) / one - t.atan() * mu, Jet::ZERO],
            A26 => [t, Jet::ZERO],
        }
    }

    /// Coordinates along the orbits, complementary to [`Ansatz::invariants`].
    pub fn orbit(&self, p: &Point) -> [f64; 2] {
        let angle = p.y.atan2(p.x);
        match self.id {
            A11 | A12 | A13 | A14 | A15 => [p.t, 0.0],
            A16 => [angle, 0.0],
            A17 | A18 => [p.y, 0.0],
            A21 => [p.t, p.x.hypot(p.y)],
            A22 | A23 | A24 => [p.t, angle],
            A25 => [p.t, p.y],
            A26 => [p.x, p.y],
        }
    }

    fn reduced_singular(&self, z: [f64; 2]) -> bool {
        match self.id {
            A16 => !(z[1] > 0.0),
            A22 | A23 | A24 => !(z[0] > 0.0),
            A17 => !(z[0].abs() < std::f64::consts::FRAC_PI_2),
            _ => !(z[0].is_finite() && z[1].is_finite()),
        }
    }

    /// The space-time point with invariants `z` and orbit coordinates `orbit`, as jets in `z`.
    pub fn section(&self, z: [Jet; 2], orbit: [f64; 2]) -> Result<[Jet; 3]> {
        let singular = || Error::SingularPoint(z[0].v, z[1].v, orbit[0]);
        if self.reduced_singular([z[0].v, z[1].v]) {
            return Err(singular());
        }
        let (k, mu) = (self.kappa, self.mu);
        let t0 = Jet::constant(orbit[0]);
        let [z1, z2] = z;
        let out = match self.id {
            A11 => {
                let (x, y) = rotate(z1, z2, t0 * k);
                [t0, x, y]
            }
            A12 => [t0, z1, z2 + orbit[0] * orbit[0] * 0.5],
            A13 => {
                if !(orbit[0] * self.t_sign > 0.0) {
                    return Err(singular());
                }
                let at = self.abs_t(t0);
                let (x, y) = rotate(z1, z2, at.ln() * k);
                let s = at.sqrt();
                [t0, x * s, y * s]
            }
            A14 => {
                let (x, y) = rotate(z1, z2, t0.atan() * k);
                let q = (t0 * t0 + 1.0).sqrt();
                [t0, x * q, y * q]
            }
            A15 => {
                let a = z1 + t0.atan() * mu;
                [t0, t0 * a + z2, t0 * z2 - a]
            }
            A16 => [z1, z2 * orbit[0].cos(), z2 * orbit[0].sin()],
            A17 => {
                let t = tan(z1);
                let y = Jet::constant(orbit[0]);
                [t, z2 * (t * t + 1.0) - t * y, y]
            }
            A18 => [z1, z2, Jet::constant(orbit[0])],
            A21 => {
                let r = orbit[1];
                let theta = z1 + k * r.ln();
                if !(r > 0.0) || !(theta.v.abs() < std::f64::consts::FRAC_PI_2) {
                    return Err(singular());
                }
                [t0, theta.cos() * r, theta.sin() * r]
            }
            A22 | A23 | A24 => {
                let r = match self.id {
                    A22 => z1,
                    A23 => {
                        if !(orbit[0] * self.t_sign > 0.0) {
                            return Err(singular());
                        }
                        z1 * (orbit[0] * self.t_sign).sqrt()
                    }
                    _ => z1 * (orbit[0] * orbit[0] + 1.0).sqrt(),
                };
                [t0, r * orbit[1].cos(), r * orbit[1].sin()]
            }
            A25 => {
                let y = Jet::constant(orbit[1]);
                [t0, (z1 + t0.atan() * mu) * (t0 * t0 + 1.0) - t0 * y, y]
            }
            A26 => [z1, Jet::constant(orbit[0]), Jet::constant(orbit[1])],
        };
        Ok(out)
    }

    /// `(u, v)` from the reduced functions, everything as jets in the same variables.
    pub fn forward(&self, c: &[Jet; 3], w: &[Jet; 2]) -> [Jet; 2] {
        let [t, x, y] = *c;
        let [a, b] = *w;
        let (k, mu) = (self.kappa, self.mu);
        let one = t * t + 1.0;
        let r2 = x * x + y * y;
        let polar = |s: Jet| {
            // (x a − y b)/s + x/r², (y a + x b)/s + y/r²
            [(x * a - y * b) / s + x / r2, (y * a + x * b) / s + y / r2]
        };
        match self.id {
            A11 => {
                let (p, q) = rotate(a, b, t * k);
                [p - y * k, q + x * k]
            }
            A12 => [a, b + t],
            A13 => {
                let at = self.abs_t(t);
                let (p, q) = rotate(a, b, at.ln() * k);
                let s = at.sqrt();
                [p / s + x / (t * 2.0) - y * k / t, q / s + y / (t * 2.0) + x * k / t]
            }
            A14 => {
                let (p, q) = rotate(a, b, t.atan() * k);
                let s = one.sqrt();
                [p / s + (t * x - y * k) / one, q / s + (t * y + x * k) / one]
            }
            A15 => [(t * a + b + t * (x + mu) - y) / one, (t * b - a + t * y + x - mu) / one],
            A16 => polar(radius(x, y)),
            A17 => [(a - t * b + t * x - y) / one, (t * a + b + x + t * y) / one],
            A18 => [a, b],
            A21 => [(x * a - y * b) / r2, (y * a + x * b) / r2],
            A22 => polar(radius(x, y)),
            A23 => {
                let [u, v] = polar(radius(x, y) * self.abs_t(t).sqrt());
                [u + x / (t * 2.0), v + y / (t * 2.0)]
            }
            A24 => {
                let [u, v] = polar(radius(x, y) * one.sqrt());
                [u + t * x / one, v + t * y / one]
            }
            A25 => [(a - t * b + t * x - y + mu) / one, (t * a + b + x + t * y + t * mu) / one],
            A26 => {
                let den = t * t + mu;
                [(t * a - b * mu + t * x - y * mu) / den, (a + t * b + x + t * y) / den]
            }
        }
    }

    /// The reduced functions recovered from `(u, v)`; inverse of [`Ansatz::forward`].
    pub fn inverse(&self, c: &[Jet; 3], uv: &[Jet; 2]) -> [Jet; 2] {
        let [t, x, y] = *c;
        let [u, v] = *uv;
        let (k, mu) = (self.kappa, self.mu);
        let one = t * t + 1.0;
        let r2 = x * x + y * y;
        let unpolar = |s: Jet, p: Jet, q: Jet| {
            let p = p - x / r2;
            let q = q - y / r2;
            let f = s / r2;
            [(x * p + y * q) * f, (x * q - y * p) * f]
        };
        let solve_17 = |p: Jet, q: Jet| [(p + t * q) / one, (q - t * p) / one];
        match self.id {
            A11 => {
                let (a, b) = rotate(u + y * k, v - x * k, t * -k);
                [a, b]
            }
            A12 => [u, v - t],
            A13 => {
                let at = self.abs_t(t);
                let s = at.sqrt();
                let p = (u - x / (t * 2.0) + y * k / t) * s;
                let q = (v - y / (t * 2.0) - x * k / t) * s;
                let (a, b) = rotate(p, q, at.ln() * -k);
                [a, b]
            }
            A14 => {
                let s = one.sqrt();
                let p = (u - (t * x - y * k) / one) * s;
                let q = (v - (t * y + x * k) / one) * s;
                let (a, b) = rotate(p, q, t.atan() * -k);
                [a, b]
            }
            A15 => {
                let p = u - (t * (x + mu) - y) / one;
                let q = v - (t * y + x - mu) / one;
                [t * p - q, p + t * q]
            }
            A16 => unpolar(radius(x, y), u, v),
            A17 => solve_17(u * one - (t * x - y), v * one - (x + t * y)),
            A18 => [u, v],
            A21 => [x * u + y * v, x * v - y * u],
            A22 => unpolar(radius(x, y), u, v),
            A23 => unpolar(radius(x, y) * self.abs_t(t).sqrt(), u - x / (t * 2.0), v - y / (t * 2.0)),
            A24 => unpolar(radius(x, y) * one.sqrt(), u - t * x / one, v - t * y / one),
            A25 => solve_17(u * one - (t * x - y + mu), v * one - (x + t * y + t * mu)),
            A26 => {
                let den = t * t + mu;
                let p = u * den - (t * x - y * mu);
                let q = v * den - (x + t * y);
                [(t * p + q * mu) / den, (t * q - p) / den]
            }
        }
    }

    /// Left-hand sides of the reduced system for the jets `w` at `z`.
    pub fn reduced_residual_jets(&self, z: [f64; 2], w: &[Jet; 2]) -> Result<(f64, f64)> {
        if self.reduced_singular(z) {
            return Err(Error::SingularPoint(z[0], z[1], 0.0));
        }
        let [a, b] = w;
        let lap = |j: &Jet| j.h[0] + j.h[3];
        // ODE shorthand: value, first and second derivative in ω
        let (p1, d1, s1) = (a.v, a.g[0], a.h[0]);
        let (p2, d2, s2) = (b.v, b.g[0], b.h[0]);
        let om = z[0];
        let out = match self.id {
            A11 | A12 | A13 | A14 | A15 => {
                let (k, alpha, beta) = self.grouped().expect("grouped system");
                let adv = |j: &Jet| a.v * j.g[0] + b.v * j.g[1];
                (
                    adv(a) - lap(a) - 2.0 * k * b.v + alpha * z[0],
                    adv(b) - lap(b) + 2.0 * k * a.v + alpha * z[1] + beta,
                )
            }
            A16 => {
                let z2 = z[1];
                (
                    a.g[0] + a.v * a.g[1] - a.h[3] - b.v * b.v / z2 - 1.0 / (z2 * z2 * z2),
                    b.g[0] + a.v * b.g[1] - b.h[3] + a.v * b.v / z2 + 2.0 * b.v / (z2 * z2),
                )
            }
            A17 => (
                a.g[0] + a.v * a.g[1] - a.h[3] - 2.0 * b.v,
                b.g[0] + a.v * b.g[1] - b.h[3] + 2.0 * a.v,
            ),
            A18 => (a.g[0] + a.v * a.g[1] - a.h[3], b.g[0] + a.v * b.g[1] - b.h[3]),
            A21 => {
                let k = self.kappa;
                let drift = p2 - k * p1 - 2.0 * k;
                (
                    drift * d1 - (k * k + 1.0) * s1 + 2.0 * d2 - p1 * p1 - p2 * p2,
                    drift * d2 - (k * k + 1.0) * s2 - 2.0 * d1,
                )
            }
            A22 | A23 | A24 => {
                let extra = match self.id {
                    A22 => 0.0,
                    A23 => -om / 4.0,
                    _ => om,
                };
                (
                    p1 * d1 - s1 - p2 * p2 / om - 1.0 / (om * om * om) + extra,
                    p1 * d2 - s2 + p1 * p2 / om + 2.0 * p2 / (om * om),
                )
            }
            A25 => (p1 * d1 - s1 - 2.0 * p2, p1 * d2 - s2 + 2.0 * p1 + 2.0 * self.mu),
            A26 => (d1, d2),
        };
        Ok(out)
    }

    /// Value of the reduced form of the constraint `u_y = v_x` for the jets `w` at `z`.
    pub fn constraint_jets(&self, z: [f64; 2], w: &[Jet; 2]) -> Result<f64> {
        if self.reduced_singular(z) {
            return Err(Error::SingularPoint(z[0], z[1], 0.0));
        }
        let [a, b] = w;
        let curl = a.g[1] - b.g[0];
        Ok(match self.id {
            A11 | A14 => curl - 2.0 * self.kappa,
            A12 => curl,
            A13 => curl - 2.0 * self.kappa * self.t_sign,
            A15 => curl - 2.0,
            A16 => z[1] * b.g[1] + b.v,
            A17 => b.g[1] + 2.0,
            A18 => b.g[1],
            A21 => a.g[0] + self.kappa * b.g[0],
            A22 | A23 | A24 => z[0] * b.g[0] + b.v,
            A25 => b.g[0] + 2.0,
            A26 => 1.0,
        })
    }

    /// Solve the ODE system for `(φ¹'', φ²'')`; not defined for 2.6, which is first order.
    fn second_derivatives(&self, om: f64, phi: [f64; 2], dphi: [f64; 2]) -> Result<[f64; 2]> {
        let lead = match self.id {
            A21 => self.kappa * self.kappa + 1.0,
            A22 | A23 | A24 | A25 => 1.0,
            _ => return Err(Error::InvalidInput(format!("ansatz {} has no second-order ODE form", self.id))),
        };
        let jets = [0, 1].map(|i| Jet { v: phi[i], g: [dphi[i], 0.0, 0.0], h: [0.0; 6] });
        let (e1, e2) = self.reduced_residual_jets([om, 0.0], &jets)?;
        Ok([e1 / lead, e2 / lead])
    }

    /// Sampling region used when a solution does not declare one.
    pub fn default_domain(&self) -> ReducedDomain {
        let t = if self.t_sign < 0.0 { (-1.5, -0.5) } else { (0.5, 1.5) };
        match self.id {
            A16 => ReducedDomain { z1: (0.5, 1.5), z2: (0.5, 1.5), orbit: [(0.2, 1.2), (0.0, 0.0)] },
            A17 | A18 => ReducedDomain { z1: (0.5, 1.2), z2: (0.5, 1.5), orbit: [(-0.5, 0.5), (0.0, 0.0)] },
            A21 => ReducedDomain { z1: (0.2, 1.0), z2: (0.0, 0.0), orbit: [t, (0.8, 1.2)] },
            A22 | A23 | A24 => ReducedDomain { z1: (0.5, 1.5), z2: (0.0, 0.0), orbit: [t, (0.2, 1.2)] },
            A25 => ReducedDomain { z1: (0.5, 1.5), z2: (0.0, 0.0), orbit: [t, (0.5, 1.5)] },
            A26 => ReducedDomain { z1: (0.5, 1.5), z2: (0.0, 0.0), orbit: [(0.5, 1.5), (0.5, 1.5)] },
            _ => ReducedDomain { z1: (0.5, 1.5), z2: (0.5, 1.5), orbit: [t, (0.0, 0.0)] },
        }
    }
}

/// Box of reduced variables and orbit coordinates used for sampling.
/// For the ODE ansatzes `z2` is unused; for the PDE ansatzes the second orbit range is unused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDomain {
    pub z1: (f64, f64),
    pub z2: (f64, f64),
    pub orbit: [(f64, f64); 2],
}

fn linspace(r: (f64, f64), n: usize) -> Vec<f64> {
    if n <= 1 || r.0 == r.1 {
        return vec![0.5 * (r.0 + r.1)];
    }
    (0..n).map(|i| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64).collect()
}

impl ReducedDomain {
    /// Sample pairs `(z, orbit)`: a 4×4 grid with two orbit values for the PDE
    /// ansatzes, eight values of `ω` with 2×2 orbit values for the ODE ansatzes.
    pub fn samples(&self, pde: bool) -> Vec<([f64; 2], [f64; 2])> {
        let mut out = Vec::new();
        if pde {
            for &a in &linspace(self.z1, 4) {
                for &b in &linspace(self.z2, 4) {
                    for &o in &linspace(self.orbit[0], 2) {
                        out.push(([a, b], [o, 0.0]));
                    }
                }
            }
        } else {
            for &a in &linspace(self.z1, 8) {
                for &o0 in &linspace(self.orbit[0], 2) {
                    for &o1 in &linspace(self.orbit[1], 2) {
                        out.push(([a, 0.0], [o0, o1]));
                    }
                }
            }
        }
        out
    }
}

type ReducedFn = dyn Fn([f64; 2]) -> Result<[Jet; 2]> + Send + Sync;

/// Reduced functions together with their ansatz.
#[derive(Clone)]
pub struct ReducedSolution {
    pub ansatz: Ansatz,
    pub label: String,
    pub domain: ReducedDomain,
    functions: Arc<ReducedFn>,
}

impl fmt::Debug for ReducedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedSolution").field("ansatz", &self.ansatz).field("label", &self.label).finish()
    }
}

/// `c · z₁^i · z₂^j`; negative exponents are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub i: i32,
    pub j: i32,
    pub c: f64,
}

impl Monomial {
    pub fn new(i: i32, j: i32, c: f64) -> Monomial {
        Monomial { i, j, c }
    }
}

fn poly_jet(terms: &[Monomial], z: [f64; 2]) -> Jet {
    let mut out = Jet::ZERO;
    let zj = [Jet::var(0, z[0]), Jet::var(1, z[1])];
    for m in terms {
        let f = |e: i32, v: &Jet| if e == 0 { Jet::constant(1.0) } else { v.powi(e) };
        out += f(m.i, &zj[0]) * f(m.j, &zj[1]) * m.c;
    }
    out
}

impl ReducedSolution {
    pub fn from_fn(
        ansatz: Ansatz,
        label: impl Into<String>,
        f: impl Fn([f64; 2]) -> Result<[Jet; 2]> + Send + Sync + 'static,
    ) -> ReducedSolution {
        ReducedSolution { ansatz, label: label.into(), domain: ansatz.default_domain(), functions: Arc::new(f) }
    }

    pub fn with_domain(mut self, domain: ReducedDomain) -> ReducedSolution {
        self.domain = domain;
        self
    }

    /// Jets of the reduced functions at `z` (for the ODE ansatzes `z = [ω, ·]`).
    pub fn jets(&self, z: [f64; 2]) -> Result<[Jet; 2]> {
        let mut z = z;
        if !self.ansatz.id.is_pde() {
            z[1] = 0.0;
        }
        let w = (self.functions)(z)?;
        if !(w[0].is_finite() && w[1].is_finite()) {
            return Err(Error::SingularPoint(z[0], z[1], 0.0));
        }
        Ok(w)
    }

    pub fn constant(ansatz: Ansatz, c: [f64; 2]) -> ReducedSolution {
        ReducedSolution::from_fn(ansatz, format!("constant ({}, {})", c[0], c[1]), move |_| {
            Ok([Jet::constant(c[0]), Jet::constant(c[1])])
        })
    }

    /// Laurent polynomials in `(z₁, z₂)`; for the ODE ansatzes only `z₁ = ω` may appear.
    pub fn polynomial(ansatz: Ansatz, w1: Vec<Monomial>, w2: Vec<Monomial>) -> Result<ReducedSolution> {
        if !ansatz.id.is_pde() && w1.iter().chain(&w2).any(|m| m.j != 0) {
            return Err(Error::InvalidInput("ODE ansatz: monomials may not involve z2".into()));
        }
        Ok(ReducedSolution::from_fn(ansatz, "polynomial", move |z| Ok([poly_jet(&w1, z), poly_jet(&w2, z)])))
    }

    /// Reduced functions of a field invariant under the ansatz subalgebra, read off on the
    /// section through the orbit coordinates `anchor`.
    pub fn pullback(ansatz: Ansatz, field: FieldHandle, anchor: [f64; 2], label: impl Into<String>) -> ReducedSolution {
        ReducedSolution::from_fn(ansatz, label, move |z| {
            let zj = [Jet::var(0, z[0]), Jet::var(1, z[1])];
            let sec = ansatz.section(zj, anchor)?;
            let p = Point::new(sec[0].v, sec[1].v, sec[2].v)?;
            let f = field.local(&p)?;
            let uv = [Jet::compose(&f[0], &sec), Jet::compose(&f[1], &sec)];
            Ok(ansatz.inverse(&sec, &uv))
        })
    }

    /// Numerical solution of the ODE system 2.1–2.5 with data `(φ, φ')` at `omega0`.
    pub fn ode(ansatz: Ansatz, omega0: f64, phi: [f64; 2], dphi: [f64; 2]) -> Result<ReducedSolution> {
        ansatz.second_derivatives(omega0, phi, dphi)?;
        let label = format!("ode from omega = {omega0}");
        Ok(ReducedSolution::from_fn(ansatz, label, move |z| {
            let om = z[0];
            let rhs = |w: f64, y: &[f64; 4]| {
                let s = ansatz.second_derivatives(w, [y[0], y[1]], [y[2], y[3]]).unwrap_or([f64::NAN; 2]);
                [y[2], y[3], s[0], s[1]]
            };
            let y = integrate(rhs, omega0, [phi[0], phi[1], dphi[0], dphi[1]], om, Tolerance { rtol: 1e-13, atol: 1e-15 })?;
            let s = ansatz.second_derivatives(om, [y[0], y[1]], [y[2], y[3]])?;
            Ok([0, 1].map(|i| Jet { v: y[i], g: [y[2 + i], 0.0, 0.0], h: [s[i], 0.0, 0.0, 0.0, 0.0, 0.0] }))
        }))
    }

    /// `w¹ = −2θ¹_2/θ¹`, `w² = θ²/θ¹` with `θ¹, θ²` heat solutions in `(z₁, z₂)`.
    pub fn hopf_cole_18(theta1: &HeatSolution1D, theta2: &HeatSolution1D) -> ReducedSolution {
        let ansatz = Ansatz { id: A18, kappa: 0.0, mu: 0.0, t_sign: 1.0 };
        let (a, b) = (theta1.clone(), theta2.clone());
        ReducedSolution::from_fn(ansatz, "hopf-cole", move |z| {
            let den = a.jet3(z[0], z[1], 1, 0);
            if a.is_singular(z[0]) || den.value() == 0.0 {
                return Err(Error::ZeroDenominator(format!("theta1 vanishes at ({}, {})", z[0], z[1])));
            }
            Ok([(a.jet3(z[0], z[1], 1, 1) / den * -2.0).to_jet(), (b.jet3(z[0], z[1], 1, 0) / den).to_jet()])
        })
    }

    /// Parse `{"kind": ..., "kappa", "mu", "t_sign", "domain", ...}` for the named ansatz.
    pub fn from_json(id: AnsatzId, v: &Value) -> Result<ReducedSolution> {
        let spec: SolutionSpec =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("reduced solution: {e}")))?;
        let ansatz = Ansatz::with_t_sign(id, spec.kappa, spec.mu, spec.t_sign)?;
        let rs = match spec.source {
            Source::Constant { value } => ReducedSolution::constant(ansatz, value),
            Source::Polynomial { w1, w2 } => {
                let conv = |v: Vec<(i32, i32, f64)>| v.into_iter().map(|(i, j, c)| Monomial::new(i, j, c)).collect();
                ReducedSolution::polynomial(ansatz, conv(w1), conv(w2))?
            }
            Source::HopfCole18 { theta1, theta2 } => {
                if id != A18 {
                    return Err(Error::InvalidInput("hopf_cole_18 requires ansatz 1.8".into()));
                }
                ReducedSolution::hopf_cole_18(&HeatSolution1D::from_json(&theta1)?, &HeatSolution1D::from_json(&theta2)?)
            }
            Source::Pullback { family, params, anchor } => {
                let spec = catalog::family(&family)?;
                let params = params.unwrap_or_else(|| spec.default_params().remove(0));
                let inst = spec.build(&params)?;
                let anchor = anchor.unwrap_or_else(|| {
                    let d = ansatz.default_domain();
                    [0.5 * (d.orbit[0].0 + d.orbit[0].1), 0.5 * (d.orbit[1].0 + d.orbit[1].1)]
                });
                ReducedSolution::pullback(ansatz, inst.field, anchor, format!("pullback of {family}"))
            }
            Source::Ode { omega0, phi, dphi } => ReducedSolution::ode(ansatz, omega0, phi, dphi)?,
        };
        Ok(match spec.domain {
            Some(d) => rs.with_domain(d),
            None => rs,
        })
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct SolutionSpec {
    #[serde(default)]
    kappa: f64,
    #[serde(default)]
    mu: f64,
    #[serde(default = "one")]
    t_sign: f64,
    domain: Option<ReducedDomain>,
    #[serde(flatten)]
    source: Source,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Source {
    Constant { value: [f64; 2] },
    Polynomial {
        #[serde(default)]
        w1: Vec<(i32, i32, f64)>,
        #[serde(default)]
        w2: Vec<(i32, i32, f64)>,
    },
    #[serde(rename = "hopf_cole_18")]
    HopfCole18 { theta1: Value, theta2: Value },
    Pullback { family: String, params: Option<Value>, anchor: Option<[f64; 2]> },
    Ode { omega0: f64, phi: [f64; 2], dphi: [f64; 2] },
}

/// The field `(u, v)` given by the ansatz.
pub fn reconstruct(rs: &ReducedSolution) -> FieldHandle {
    let rs = rs.clone();
    let ansatz = rs.ansatz;
    FnField::new(move |p| {
        let c = Jet::vars(p.t, p.x, p.y);
        let z = ansatz.invariants(&c);
        let w = rs.jets([z[0].v, z[1].v])?;
        let wt = [Jet::compose(&w[0], &z), Jet::compose(&w[1], &z)];
        Ok(ansatz.forward(&c, &wt))
    })
    .with_singular(move |p| ansatz.is_singular(p))
    .handle()
}

pub fn reduced_residual(rs: &ReducedSolution, z: [f64; 2]) -> Result<(f64, f64)> {
    rs.ansatz.reduced_residual_jets(z, &rs.jets(z)?)
}

pub fn reduced_constraint(rs: &ReducedSolution, z: [f64; 2]) -> Result<f64> {
    rs.ansatz.constraint_jets(z, &rs.jets(z)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub ansatz: String,
    pub label: String,
    pub samples: usize,
    /// Samples that could not be evaluated.
    pub failures: usize,
    pub reduced_max: f64,
    pub full_max: f64,
    pub constraint_max: f64,
    /// Samples where exactly one of the two residuals is below the tolerance.
    pub mismatches: usize,
    pub reduced_solution: bool,
    pub consistent: bool,
    pub tolerance: f64,
}

/// Compare the reduced residual at `z` with the full residual of [`reconstruct`] at the
/// space-time points over `z` on the sample grid of the solution's domain.
pub fn consistency_check(rs: &ReducedSolution) -> ConsistencyReport {
    let field = reconstruct(rs);
    let ansatz = rs.ansatz;
    let samples = rs.domain.samples(ansatz.id.is_pde());
    let mut rep = ConsistencyReport {
        ansatz: ansatz.id.to_string(),
        label: rs.label.clone(),
        samples: samples.len(),
        failures: 0,
        reduced_max: 0.0,
        full_max: 0.0,
        constraint_max: 0.0,
        mismatches: 0,
        reduced_solution: false,
        consistent: false,
        tolerance: CONSISTENCY_TOL,
    };
    let mut reduced_ok = 0;
    for (z, orbit) in samples {
        let eval = || -> Result<(f64, f64, f64)> {
            let w = rs.jets(z)?;
            let (e1, e2) = ansatz.reduced_residual_jets(z, &w)?;
            let cons = ansatz.constraint_jets(z, &w)?;
            let sec = ansatz.section([Jet::constant(z[0]), Jet::constant(z[1])], orbit)?;
            let p = Point::new(sec[0].v, sec[1].v, sec[2].v)?;
            let (r1, r2) = burgers_residual_at(&field.local(&p)?);
            Ok((e1.abs().max(e2.abs()), r1.abs().max(r2.abs()), cons.abs()))
        };
        match eval() {
            Ok((red, full, cons)) if red.is_finite() && full.is_finite() => {
                rep.reduced_max = rep.reduced_max.max(red);
                rep.full_max = rep.full_max.max(full);
                rep.constraint_max = rep.constraint_max.max(cons);
                if (red <= CONSISTENCY_TOL) != (full <= CONSISTENCY_TOL) {
                    rep.mismatches += 1;
                }
                if red <= CONSISTENCY_TOL {
                    reduced_ok += 1;
                }
            }
            _ => rep.failures += 1,
        }
    }
    let evaluated = rep.samples - rep.failures;
    rep.reduced_solution = evaluated > 0 && reduced_ok == evaluated;
    rep.consistent = evaluated > 0 && rep.failures == 0 && rep.mismatches == 0;
    rep
}

impl ConsistencyReport {
    /// Consistent, and a solution on every sample.
    pub fn positive_pass(&self) -> bool {
        self.consistent && self.reduced_solution
    }

    /// Consistent, and clearly not a solution anywhere.
    pub fn negative_pass(&self) -> bool {
        self.consistent && !self.reduced_solution && self.full_max > 1e-3 && self.reduced_max > 1e-3
    }
}

// ---------------------------------------------------------------------------
// Linearization of the system 1.8

fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::QuadratureFailure(format!("non-finite integrand near {lm}")));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol || (b - a).abs() < 1e-12 {
        return Ok(left + right + diff / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure(format!("no convergence on [{a}, {b}]")));
    }
    Ok(simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)?)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite integrand".into()));
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// `θ¹ = exp(−½∫w¹ dz₂)` from `anchor` (gauge `h = 0`) and `θ² = θ¹w²`.
pub struct Linearization18 {
    rs: ReducedSolution,
    pub anchor: f64,
}

pub fn linearize_18(rs: &ReducedSolution, anchor: f64) -> Result<Linearization18> {
    if rs.ansatz.id != A18 {
        return Err(Error::InvalidInput(format!("linearization needs ansatz 1.8, got {}", rs.ansatz.id)));
    }
    if !anchor.is_finite() {
        return Err(Error::InvalidInput("non-finite anchor".into()));
    }
    Ok(Linearization18 { rs: rs.clone(), anchor })
}

impl Linearization18 {
    pub fn theta(&self, z1: f64, z2: f64) -> Result<[f64; 2]> {
        let w1 = |s: f64| self.rs.jets([z1, s]).map(|w| w[0].v).unwrap_or(f64::NAN);
        let integral = adaptive_simpson(&w1, self.anchor, z2, 1e-13)?;
        let theta1 = (-0.5 * integral).exp();
        let w2 = self.rs.jets([z1, z2])?[1].v;
        if theta1 == 0.0 || !theta1.is_finite() {
            return Err(Error::ZeroDenominator(format!("theta1 at ({z1}, {z2})")));
        }
        Ok([theta1, theta1 * w2])
    }

    /// `(w¹, w²)` recomputed from `θ` with a five-point difference of `ln θ¹` in `z₂`.
    pub fn back(&self, z1: f64, z2: f64) -> Result<[f64; 2]> {
        let h = 1e-3;
        let l = |s: f64| self.theta(z1, s).map(|t| t[0].ln());
        let d = (l(z2 - 2.0 * h)? - 8.0 * l(z2 - h)? + 8.0 * l(z2 + h)? - l(z2 + 2.0 * h)?) / (12.0 * h);
        let th = self.theta(z1, z2)?;
        Ok([-2.0 * d, th[1] / th[0]])
    }
}

/// Largest deviation of `(w¹, w²)` after linearizing and transforming back.
pub fn linearization_round_trip(rs: &ReducedSolution, anchor: f64, points: &[[f64; 2]]) -> Result<f64> {
    let lin = linearize_18(rs, anchor)?;
    let mut worst = 0.0f64;
    for z in points {
        let w = rs.jets(*z)?;
        let b = lin.back(z[0], z[1])?;
        worst = worst.max((w[0].v - b[0]).abs()).max((w[1].v - b[1]).abs());
    }
    Ok(worst)
}

/// `D₁(w¹) + D₂((w¹)²/2 − w¹₂)` by central differences of density and flux.
pub fn conserved_current_divergence(rs: &ReducedSolution, z: [f64; 2]) -> Result<f64> {
    if rs.ansatz.id != A18 {
        return Err(Error::InvalidInput("conserved current is defined for ansatz 1.8".into()));
    }
    let h = 1e-3;
    let d5 = |f: &dyn Fn(f64) -> Result<f64>, c: f64| -> Result<f64> {
        Ok((f(c - 2.0 * h)? - 8.0 * f(c - h)? + 8.0 * f(c + h)? - f(c + 2.0 * h)?) / (12.0 * h))
    };
    let density = |s: f64| rs.jets([s, z[1]]).map(|w| w[0].v);
    let flux = |s: f64| {
        rs.jets([z[0], s]).map(|w| 0.5 * w[0].v * w[0].v - w[0].g[1])
    };
    Ok(d5(&density, z[0])? + d5(&flux, z[1])?)
}
