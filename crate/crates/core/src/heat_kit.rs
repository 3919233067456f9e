//! Closed-form solutions of the linear heat equations `θ_s = θ_qq` and `φ_t = φ_xx + φ_yy`,
//! and the Darboux operator for the potential `6/y²`.
//!
//! Every atom has derivatives of any order in the space variable; time derivatives follow from
//! `∂_s = ∂_q²`.

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::jet::Jet3;

pub const MAX_HEAT_POLY_DEGREE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeatAtom {
    /// Heat polynomial `h_n(s, q) = n! Σ s^k q^(n−2k) / (k! (n−2k)!)`.
    Poly { n: usize },
    /// Fundamental solution `(4π(s−s0))^(−1/2) exp(−(q−q0)²/(4(s−s0)))`, defined for `s > s0`.
    Gauss { s0: f64, q0: f64 },
    /// `exp(λ² s + sign·λ q)`.
    Exp { lambda: f64, sign: f64 },
    /// `exp(−λ² s) sin(λ q + phase)`.
    Trig { lambda: f64, phase: f64 },
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Physicists' Hermite polynomial.
fn hermite(m: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if m == 0 {
        return a;
    }
    for n in 1..m {
        let c = 2.0 * x * b - 2.0 * n as f64 * a;
        a = b;
        b = c;
    }
    b
}

fn heat_poly(n: usize, s: f64, q: f64) -> f64 {
    let nf = factorial(n);
    (0..=n / 2)
        .map(|k| nf * s.powi(k as i32) * q.powi((n - 2 * k) as i32) / (factorial(k) * factorial(n - 2 * k)))
        .sum()
}

impl HeatAtom {
    pub fn poly(n: usize) -> Result<HeatAtom> {
        if n > MAX_HEAT_POLY_DEGREE {
            return Err(Error::DegreeTooLarge(n));
        }
        Ok(HeatAtom::Poly { n })
    }

    pub fn is_singular(&self, s: f64) -> bool {
        matches!(self, HeatAtom::Gauss { s0, .. } if s <= *s0)
    }

    /// `∂_q^m` of the atom.
    pub fn dq(&self, m: usize, s: f64, q: f64) -> f64 {
        match *self {
            HeatAtom::Poly { n } => {
                if m > n {
                    0.0
                } else {
                    factorial(n) / factorial(n - m) * heat_poly(n - m, s, q)
                }
            }
            HeatAtom::Gauss { s0, q0 } => {
                let tau = s - s0;
                if tau <= 0.0 {
                    return f64::NAN;
                }
                let st = tau.sqrt();
                let xi = (q - q0) / (2.0 * st);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                (4.0 * PI * tau).powf(-0.5) * (2.0 * st).powi(-(m as i32)) * sign * hermite(m, xi) * (-xi * xi).exp()
            }
            HeatAtom::Exp { lambda, sign } => {
                let k = sign * lambda;
                k.powi(m as i32) * (lambda * lambda * s + k * q).exp()
            }
            HeatAtom::Trig { lambda, phase } => {
                lambda.powi(m as i32) * (-lambda * lambda * s).exp() * (lambda * q + phase + m as f64 * PI / 2.0).sin()
            }
        }
    }

    fn from_json(v: &Value) -> Result<(f64, HeatAtom)> {
        let bad = |m: &str| Error::InvalidInput(format!("heat atom: {m}"));
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        for k in obj.keys() {
            if !["kind", "params", "coeff"].contains(&k.as_str()) {
                return Err(bad(&format!("unknown key {k}")));
            }
        }
        let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing kind"))?;
        let coeff = match obj.get("coeff") {
            None => 1.0,
            Some(c) => c.as_f64().ok_or_else(|| bad("coeff must be a number"))?,
        };
        let empty = serde_json::Map::new();
        let params = match obj.get("params") {
            None => &empty,
            Some(p) => p.as_object().ok_or_else(|| bad("params must be an object"))?,
        };
        let allowed: &[&str] = match kind {
            "poly" => &["n"],
            "gauss" => &["s0", "q0"],
            "exp" => &["lambda", "sign"],
            "trig" => &["lambda", "phase"],
            _ => return Err(bad(&format!("unknown kind {kind}"))),
        };
        for k in params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(bad(&format!("unknown parameter {k} for {kind}")));
            }
        }
        let num = |k: &str, d: f64| -> Result<f64> {
            match params.get(k) {
                None => Ok(d),
                Some(x) => x.as_f64().filter(|x| x.is_finite()).ok_or_else(|| bad(&format!("{k} must be a finite number"))),
            }
        };
        let atom = match kind {
            "poly" => {
                let n = params.get("n").and_then(Value::as_u64).ok_or_else(|| bad("poly needs integer n"))?;
                HeatAtom::poly(n as usize)?
            }
            "gauss" => HeatAtom::Gauss { s0: num("s0", 0.0)?, q0: num("q0", 0.0)? },
            "exp" => {
                let sign = num("sign", 1.0)?;
                if sign != 1.0 && sign != -1.0 {
                    return Err(bad("exp sign must be 1 or -1"));
                }
                HeatAtom::Exp { lambda: num("lambda", 1.0)?, sign }
            }
            _ => HeatAtom::Trig { lambda: num("lambda", 1.0)?, phase: num("phase", 0.0)? },
        };
        Ok((coeff, atom))
    }

    fn to_json(self, coeff: f64) -> Value {
        match self {
            HeatAtom::Poly { n } => json!({"kind": "poly", "params": {"n": n}, "coeff": coeff}),
            HeatAtom::Gauss { s0, q0 } => json!({"kind": "gauss", "params": {"s0": s0, "q0": q0}, "coeff": coeff}),
            HeatAtom::Exp { lambda, sign } => json!({"kind": "exp", "params": {"lambda": lambda, "sign": sign}, "coeff": coeff}),
            HeatAtom::Trig { lambda, phase } => json!({"kind": "trig", "params": {"lambda": lambda, "phase": phase}, "coeff": coeff}),
        }
    }
}

/// Linear combination of atoms solving `θ_s = θ_qq`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeatSolution1D {
    pub terms: Vec<(f64, HeatAtom)>,
}

impl HeatSolution1D {
    pub fn zero() -> Self {
        HeatSolution1D { terms: vec![] }
    }

    pub fn atom(coeff: f64, a: HeatAtom) -> Self {
        HeatSolution1D { terms: vec![(coeff, a)] }
    }

    pub fn constant(c: f64) -> Self {
        Self::atom(c, HeatAtom::Poly { n: 0 })
    }

    pub fn heat_polynomial(n: usize) -> Result<Self> {
        Ok(Self::atom(1.0, HeatAtom::poly(n)?))
    }

    /// `e^s cosh q`.
    pub fn cosh_mode(scale: f64) -> Self {
        HeatSolution1D {
            terms: vec![
                (0.5 * scale, HeatAtom::Exp { lambda: 1.0, sign: 1.0 }),
                (0.5 * scale, HeatAtom::Exp { lambda: 1.0, sign: -1.0 }),
            ],
        }
    }

    pub fn with(mut self, coeff: f64, a: HeatAtom) -> Self {
        self.terms.push((coeff, a));
        self
    }

    pub fn is_singular(&self, s: f64) -> bool {
        self.terms.iter().any(|(_, a)| a.is_singular(s))
    }

    pub fn dq(&self, m: usize, s: f64, q: f64) -> f64 {
        self.terms.iter().map(|(c, a)| c * a.dq(m, s, q)).sum()
    }

    pub fn value(&self, s: f64, q: f64) -> f64 {
        self.dq(0, s, q)
    }

    /// `∂_s^ms ∂_q^mq θ`.
    pub fn deriv(&self, ms: usize, mq: usize, s: f64, q: f64) -> f64 {
        self.dq(mq + 2 * ms, s, q)
    }

    /// Third-order jet of `∂_q^shift θ` in the variables `(t, x, y)`, with `s = t` and `q` the
    /// variable of index `qvar` (1 or 2).
    pub fn jet3(&self, t: f64, q: f64, qvar: usize, shift: usize) -> Jet3 {
        let other = 3 - qvar;
        Jet3::from_derivatives(|m| if m[other] != 0 { 0.0 } else { self.deriv(m[0] as usize, m[qvar] as usize + shift, t, q) })
    }

    /// Third-order jet in `(t, x, y)` of `∂_q^shift θ(t, q)` along the affine map
    /// `q = lin·(t, x, y) + offset`.
    pub fn jet3_linear(&self, p: [f64; 3], lin: [f64; 3], offset: f64, shift: usize) -> Jet3 {
        let q = lin[0] * p[0] + lin[1] * p[1] + lin[2] * p[2] + offset;
        let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
        Jet3::from_derivatives(|m| {
            let (i, j, k) = (m[0] as usize, m[1] as i32, m[2] as i32);
            let space = lin[1].powi(j) * lin[2].powi(k);
            if space == 0.0 {
                return 0.0;
            }
            (0..=i)
                .map(|ms| {
                    let mq = i - ms + j as usize + k as usize;
                    binom[i][ms] * lin[0].powi((i - ms) as i32) * space * self.deriv(ms, mq + shift, p[0], q)
                })
                .sum()
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::InvalidInput("heat solution must be an array of atoms".into()))?;
        Ok(HeatSolution1D { terms: arr.iter().map(HeatAtom::from_json).collect::<Result<_>>()? })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(c, a)| a.to_json(*c)).collect())
    }

    /// Check that `θ` does not vanish at the sampled `(s, q)`; the sign must be uniform.
    pub fn check_nonvanishing(&self, samples: &[(f64, f64)]) -> Result<()> {
        let mut sign = 0.0;
        for &(s, q) in samples {
            let v = self.value(s, q);
            if !(v.abs() > 1e-12) || (sign != 0.0 && v.signum() != sign) {
                return Err(Error::ZeroDenominator(format!("heat solution vanishes near (s, q) = ({s}, {q})")));
            }
            sign = v.signum();
        }
        Ok(())
    }
}

/// Linear combination of atoms.
pub fn superpose(parts: &[(f64, &HeatSolution1D)]) -> HeatSolution1D {
    let mut out = HeatSolution1D::zero();
    for (c, h) in parts {
        for (k, a) in &h.terms {
            out.terms.push((c * k, *a));
        }
    }
    out
}

/// A product `coeff · X(t, x) · Y(t, y)` of one-dimensional solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProduct {
    pub coeff: f64,
    pub x: HeatSolution1D,
    pub y: HeatSolution1D,
}

/// Sum of products; solves `φ_t = φ_xx + φ_yy`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeatSolution2D {
    pub terms: Vec<HeatProduct>,
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl HeatSolution2D {
    pub fn constant(c: f64) -> Self {
        Self::product(c, HeatSolution1D::constant(1.0), HeatSolution1D::constant(1.0))
    }

    pub fn product(coeff: f64, x: HeatSolution1D, y: HeatSolution1D) -> Self {
        HeatSolution2D { terms: vec![HeatProduct { coeff, x, y }] }
    }

    pub fn from_x(h: HeatSolution1D) -> Self {
        Self::product(1.0, h, HeatSolution1D::constant(1.0))
    }

    pub fn from_y(h: HeatSolution1D) -> Self {
        Self::product(1.0, HeatSolution1D::constant(1.0), h)
    }

    /// `(4π(t−t0))^(−1) exp(−((x−x0)² + (y−y0)²)/(4(t−t0)))`.
    pub fn gauss(t0: f64, x0: f64, y0: f64) -> Self {
        Self::product(
            1.0,
            HeatSolution1D::atom(1.0, HeatAtom::Gauss { s0: t0, q0: x0 }),
            HeatSolution1D::atom(1.0, HeatAtom::Gauss { s0: t0, q0: y0 }),
        )
    }

    pub fn plus(mut self, o: HeatSolution2D) -> Self {
        self.terms.extend(o.terms);
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for p in &mut self.terms {
            p.coeff *= c;
        }
        self
    }

    pub fn is_singular(&self, t: f64) -> bool {
        self.terms.iter().any(|p| p.x.is_singular(t) || p.y.is_singular(t))
    }

    /// `∂_t^a ∂_x^b ∂_y^c φ`.
    pub fn deriv(&self, a: usize, b: usize, c: usize, t: f64, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|p| {
                p.coeff
                    * (0..=a).map(|i| binom(a, i) * p.x.dq(2 * i + b, t, x) * p.y.dq(2 * (a - i) + c, t, y)).sum::<f64>()
            })
            .sum()
    }

    pub fn value(&self, t: f64, x: f64, y: f64) -> f64 {
        self.deriv(0, 0, 0, t, x, y)
    }

    pub fn jet3(&self, t: f64, x: f64, y: f64) -> Jet3 {
        Jet3::from_derivatives(|m| self.deriv(m[0] as usize, m[1] as usize, m[2] as usize, t, x, y))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(format!("2D heat solution: {m}"));
        let arr = v.as_array().ok_or_else(|| bad("expected an array of products"))?;
        let mut terms = Vec::new();
        for p in arr {
            let obj = p.as_object().ok_or_else(|| bad("product must be an object"))?;
            for k in obj.keys() {
                if !["coeff", "x", "y"].contains(&k.as_str()) {
                    return Err(bad(&format!("unknown key {k}")));
                }
            }
            let coeff = obj.get("coeff").map_or(Some(1.0), Value::as_f64).ok_or_else(|| bad("coeff must be a number"))?;
            let side = |k: &str| obj.get(k).map_or(Ok(HeatSolution1D::constant(1.0)), HeatSolution1D::from_json);
            terms.push(HeatProduct { coeff, x: side("x")?, y: side("y")? });
        }
        Ok(HeatSolution2D { terms })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|p| json!({"coeff": p.coeff, "x": p.x.to_json(), "y": p.y.to_json()})).collect())
    }

    pub fn check_nonvanishing(&self, samples: &[[f64; 3]]) -> Result<()> {
        let mut sign = 0.0;
        for s in samples {
            let v = self.value(s[0], s[1], s[2]);
            if !(v.abs() > 1e-12) || (sign != 0.0 && v.signum() != sign) {
                return Err(Error::ZeroDenominator(format!("heat solution vanishes near ({}, {}, {})", s[0], s[1], s[2])));
            }
            sign = v.signum();
        }
        Ok(())
    }
}

/// `DT[y, y³+6t]θ = θ_yy − 3θ_y/y + 3θ/y²`.
pub fn darboux_dt(theta: &HeatSolution1D, t: f64, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Err(Error::SingularPoint(t, f64::NAN, y));
    }
    Ok(theta.dq(2, t, y) - 3.0 * theta.dq(1, t, y) / y + 3.0 * theta.dq(0, t, y) / (y * y))
}

/// Jet in `(t, x, y)` of the Darboux image.
pub fn darboux_jet3(theta: &HeatSolution1D, t: f64, y: f64) -> Result<Jet3> {
    if y == 0.0 {
        return Err(Error::SingularPoint(t, f64::NAN, y));
    }
    let yj = Jet3::var(2, y);
    let inv = yj.recip();
    Ok(theta.jet3(t, y, 2, 2) - theta.jet3(t, y, 2, 1) * inv * 3.0 + theta.jet3(t, y, 2, 0) * inv * inv * 3.0)
}
