//! Truncated Taylor arithmetic in three variables.
//!
//! [`Jet`] carries a value, gradient and Hessian (enough for second-order
//! residuals); [`Jet3`] carries everything up to third order and is used where
//! a second-order jet of a *derivative* is needed, e.g. `u = -2 φ_x / φ`.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Position of the (i, j) entry in the packed symmetric Hessian.
pub const fn hidx(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Second-order jet in variables 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [f64; 6],
}

impl Jet {
    pub const ZERO: Jet = Jet { v: 0.0, g: [0.0; 3], h: [0.0; 6] };

    pub fn constant(v: f64) -> Jet {
        Jet { v, ..Jet::ZERO }
    }

    /// The coordinate function of variable `i` evaluated at `v`.
    pub fn var(i: usize, v: f64) -> Jet {
        let mut j = Jet::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// The three coordinate jets at `(a, b, c)`.
    pub fn vars(a: f64, b: f64, c: f64) -> [Jet; 3] {
        [Jet::var(0, a), Jet::var(1, b), Jet::var(2, c)]
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[hidx(i, j)]
    }

    /// Apply a scalar function given its value and first two derivatives at `self.v`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let mut out = Jet::constant(f0);
        for i in 0..3 {
            out.g[i] = f1 * self.g[i];
        }
        for i in 0..3 {
            for j in i..3 {
                let k = hidx(i, j);
                out.h[k] = f1 * self.h[k] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    /// `outer` is a jet in variables `s_a`; `inner[a]` gives `s_a` as jets in new variables.
    pub fn compose(outer: &Jet, inner: &[Jet]) -> Jet {
        let mut out = Jet::constant(outer.v);
        for (a, ia) in inner.iter().enumerate() {
            for i in 0..3 {
                out.g[i] += outer.g[a] * ia.g[i];
            }
            for k in 0..6 {
                out.h[k] += outer.g[a] * ia.h[k];
            }
        }
        for (a, ia) in inner.iter().enumerate() {
            for (b, ib) in inner.iter().enumerate() {
                let w = outer.hess(a, b);
                if w == 0.0 {
                    continue;
                }
                for i in 0..3 {
                    for j in i..3 {
                        out.h[hidx(i, j)] += w * ia.g[i] * ib.g[j];
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    pub fn ln(&self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    pub fn sin(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    pub fn cos(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    pub fn atan(&self) -> Jet {
        let d = 1.0 / (1.0 + self.v * self.v);
        self.chain(self.v.atan(), d, -2.0 * self.v * d * d)
    }
    pub fn tanh(&self) -> Jet {
        let th = self.v.tanh();
        let d = 1.0 - th * th;
        self.chain(th, d, -2.0 * th * d)
    }
    pub fn cosh(&self) -> Jet {
        self.chain(self.v.cosh(), self.v.sinh(), self.v.cosh())
    }
    pub fn sinh(&self) -> Jet {
        self.chain(self.v.sinh(), self.v.cosh(), self.v.sinh())
    }
    pub fn powi(&self, n: i32) -> Jet {
        let nf = n as f64;
        let f1 = if n == 0 { 0.0 } else { nf * self.v.powi(n - 1) };
        let f2 = if n == 0 || n == 1 { 0.0 } else { nf * (nf - 1.0) * self.v.powi(n - 2) };
        self.chain(self.v.powi(n), f1, f2)
    }
    pub fn powf(&self, p: f64) -> Jet {
        self.chain(self.v.powf(p), p * self.v.powf(p - 1.0), p * (p - 1.0) * self.v.powf(p - 2.0))
    }
    pub fn abs(&self) -> Jet {
        if self.v < 0.0 {
            -*self
        } else {
            *self
        }
    }
    /// `atan2(self, x)` for the principal branch.
    pub fn atan2(&self, x: &Jet) -> Jet {
        // d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
        let y = *self;
        let rr = y.v * y.v + x.v * x.v;
        let dy = x.v / rr;
        let dx = -y.v / rr;
        let mut out = Jet::constant(y.v.atan2(x.v));
        for i in 0..3 {
            out.g[i] = dy * y.g[i] + dx * x.g[i];
        }
        let fyy = -2.0 * x.v * y.v / (rr * rr);
        let fxx = 2.0 * x.v * y.v / (rr * rr);
        let fxy = (y.v * y.v - x.v * x.v) / (rr * rr);
        for i in 0..3 {
            for j in i..3 {
                let k = hidx(i, j);
                out.h[k] = dy * y.h[k]
                    + dx * x.h[k]
                    + fyy * y.g[i] * y.g[j]
                    + fxx * x.g[i] * x.g[j]
                    + fxy * (y.g[i] * x.g[j] + x.g[i] * y.g[j]);
            }
        }
        out
    }
    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.g.iter().all(|x| x.is_finite()) && self.h.iter().all(|x| x.is_finite())
    }
    pub fn max_abs(&self) -> f64 {
        self.g.iter().chain(self.h.iter()).fold(self.v.abs(), |m, x| m.max(x.abs()))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self += o;
        self
    }
}
impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        self.v += o.v;
        for i in 0..3 {
            self.g[i] += o.g[i];
        }
        for k in 0..6 {
            self.h[k] += o.h[k];
        }
    }
}
impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        self -= o;
        self
    }
}
impl SubAssign for Jet {
    fn sub_assign(&mut self, o: Jet) {
        self.v -= o.v;
        for i in 0..3 {
            self.g[i] -= o.g[i];
        }
        for k in 0..6 {
            self.h[k] -= o.h[k];
        }
    }
}
impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..3 {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
        }
        for i in 0..3 {
            for j in i..3 {
                let k = hidx(i, j);
                out.h[k] = self.v * o.h[k] + o.v * self.h[k] + self.g[i] * o.g[j] + self.g[j] * o.g[i];
            }
        }
        out
    }
}
impl MulAssign for Jet {
    fn mul_assign(&mut self, o: Jet) {
        *self = *self * o;
    }
}
impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}
impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}
impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, c: f64) -> Jet {
        self.v *= c;
        for x in self.g.iter_mut() {
            *x *= c;
        }
        for x in self.h.iter_mut() {
            *x *= c;
        }
        self
    }
}
impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}
impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}
impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}
impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j * self
    }
}
impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, j: Jet) -> Jet {
        j.recip() * self
    }
}

// ---------------------------------------------------------------------------
// Third order

const N3: usize = 20;

/// Exponent triples of all monomials of total degree <= 3, graded.
const MONO: [[u8; 3]; N3] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [1, 1, 0],
    [1, 0, 1],
    [0, 2, 0],
    [0, 1, 1],
    [0, 0, 2],
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

fn mono_index(e: [u8; 3]) -> Option<usize> {
    MONO.iter().position(|m| *m == e)
}

fn product_table() -> &'static [(u8, u8, u8)] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<(u8, u8, u8)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::new();
        for (i, a) in MONO.iter().enumerate() {
            for (j, b) in MONO.iter().enumerate() {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if let Some(k) = mono_index(e) {
                    t.push((i as u8, j as u8, k as u8));
                }
            }
        }
        t
    })
}

/// Third-order truncated Taylor polynomial; `c[k]` is the coefficient of monomial `MONO[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    c: [f64; N3],
}

impl Jet3 {
    pub fn constant(v: f64) -> Jet3 {
        let mut c = [0.0; N3];
        c[0] = v;
        Jet3 { c }
    }
    pub fn var(i: usize, v: f64) -> Jet3 {
        let mut j = Jet3::constant(v);
        j.c[1 + i] = 1.0;
        j
    }
    pub fn vars(a: f64, b: f64, c: f64) -> [Jet3; 3] {
        [Jet3::var(0, a), Jet3::var(1, b), Jet3::var(2, c)]
    }
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Build from partial derivatives; `d([i, j, k])` is `∂ᵢ∂ⱼ∂ₖ`-type data with those multiplicities.
    pub fn from_derivatives(d: impl Fn([u8; 3]) -> f64) -> Jet3 {
        let fact = [1.0, 1.0, 2.0, 6.0];
        let mut c = [0.0; N3];
        for (k, m) in MONO.iter().enumerate() {
            c[k] = d(*m) / (fact[m[0] as usize] * fact[m[1] as usize] * fact[m[2] as usize]);
        }
        Jet3 { c }
    }

    /// Partial derivative with the given multiplicities, total order <= 3.
    pub fn derivative(&self, m: [u8; 3]) -> f64 {
        let fact = [1.0, 1.0, 2.0, 6.0];
        mono_index(m).map_or(0.0, |k| self.c[k] * fact[m[0] as usize] * fact[m[1] as usize] * fact[m[2] as usize])
    }

    /// Apply a scalar function from its first four Taylor data `f, f', f'', f'''` at the value.
    pub fn chain(&self, f: [f64; 4]) -> Jet3 {
        let mut h = *self;
        h.c[0] = 0.0;
        let h2 = h * h;
        let h3 = h2 * h;
        let mut out = Jet3::constant(f[0]);
        for k in 1..N3 {
            out.c[k] = f[1] * h.c[k] + 0.5 * f[2] * h2.c[k] + f[3] / 6.0 * h3.c[k];
        }
        out
    }

    pub fn recip(&self) -> Jet3 {
        let r = 1.0 / self.c[0];
        self.chain([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }
    pub fn exp(&self) -> Jet3 {
        let e = self.c[0].exp();
        self.chain([e; 4])
    }
    pub fn ln(&self) -> Jet3 {
        let r = 1.0 / self.c[0];
        self.chain([self.c[0].ln(), r, -r * r, 2.0 * r * r * r])
    }
    pub fn sqrt(&self) -> Jet3 {
        self.powf(0.5)
    }
    pub fn powf(&self, p: f64) -> Jet3 {
        let x = self.c[0];
        self.chain([
            x.powf(p),
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
        ])
    }
    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.c[0].sin_cos();
        self.chain([s, c, -s, -c])
    }
    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.c[0].sin_cos();
        self.chain([c, -s, -c, s])
    }
    pub fn cosh(&self) -> Jet3 {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.chain([c, s, c, s])
    }
    pub fn sinh(&self) -> Jet3 {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.chain([s, c, s, c])
    }
    pub fn atan(&self) -> Jet3 {
        let x = self.c[0];
        let d = 1.0 / (1.0 + x * x);
        self.chain([x.atan(), d, -2.0 * x * d * d, (6.0 * x * x - 2.0) * d * d * d])
    }
    /// Principal `atan2(self, x)`.
    pub fn atan2(&self, x: &Jet3) -> Jet3 {
        let base = self.c[0].atan2(x.c[0]);
        // Shift so that the ratio stays bounded: use atan(y/x) when |x| >= |y|, otherwise -atan(x/y).
        if x.c[0].abs() >= self.c[0].abs() {
            let r = (*self / *x).atan();
            r + (base - r.c[0])
        } else {
            let r = -(*x / *self).atan();
            r + (base - r.c[0])
        }
    }

    /// Second-order jet of the function itself.
    pub fn to_jet(&self) -> Jet {
        let mut j = Jet::constant(self.c[0]);
        j.g = [self.c[1], self.c[2], self.c[3]];
        j.h = [2.0 * self.c[4], self.c[5], self.c[6], 2.0 * self.c[7], self.c[8], 2.0 * self.c[9]];
        j
    }

    /// Second-order jet of the partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Jet {
        let mut d = Jet3::constant(0.0);
        for (k, m) in MONO.iter().enumerate() {
            let deg: u8 = m.iter().sum();
            if deg > 2 {
                continue;
            }
            let mut e = *m;
            e[i] += 1;
            let src = mono_index(e).expect("degree <= 3");
            d.c[k] = (m[i] as f64 + 1.0) * self.c[src];
        }
        d.to_jet()
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(mut self, o: Jet3) -> Jet3 {
        for k in 0..N3 {
            self.c[k] += o.c[k];
        }
        self
    }
}
impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(mut self, o: Jet3) -> Jet3 {
        for k in 0..N3 {
            self.c[k] -= o.c[k];
        }
        self
    }
}
impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self * -1.0
    }
}
impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        let mut out = Jet3 { c: [0.0; N3] };
        for &(i, j, k) in product_table() {
            out.c[k as usize] += self.c[i as usize] * o.c[j as usize];
        }
        out
    }
}
impl Div for Jet3 {
    type Output = Jet3;
    fn div(self, o: Jet3) -> Jet3 {
        self * o.recip()
    }
}
impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(mut self, c: f64) -> Jet3 {
        self.c[0] += c;
        self
    }
}
impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(mut self, c: f64) -> Jet3 {
        self.c[0] -= c;
        self
    }
}
impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(mut self, s: f64) -> Jet3 {
        for x in self.c.iter_mut() {
            *x *= s;
        }
        self
    }
}
impl Div<f64> for Jet3 {
    type Output = Jet3;
    fn div(self, s: f64) -> Jet3 {
        self * (1.0 / s)
    }
}
impl Mul<Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, j: Jet3) -> Jet3 {
        j * self
    }
}
impl Add<Jet3> for f64 {
    type Output = Jet3;
    fn add(self, j: Jet3) -> Jet3 {
        j + self
    }
}
impl Sub<Jet3> for f64 {
    type Output = Jet3;
    fn sub(self, j: Jet3) -> Jet3 {
        -j + self
    }
}
impl Div<Jet3> for f64 {
    type Output = Jet3;
    fn div(self, j: Jet3) -> Jet3 {
        j.recip() * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(f64, f64, f64) -> f64, jet: &Jet, p: [f64; 3]) {
        let h = 1e-4;
        let e = |i: usize| {
            let mut d = [0.0; 3];
            d[i] = h;
            d
        };
        let at = |d: [f64; 3]| f(p[0] + d[0], p[1] + d[1], p[2] + d[2]);
        for i in 0..3 {
            let di = e(i);
            let neg = [-di[0], -di[1], -di[2]];
            let g = (at(di) - at(neg)) / (2.0 * h);
            assert!((g - jet.g[i]).abs() < 1e-6, "grad {i}: {g} vs {}", jet.g[i]);
            for j in 0..3 {
                let dj = e(j);
                let s = |a: f64, b: f64| at([a * di[0] + b * dj[0], a * di[1] + b * dj[1], a * di[2] + b * dj[2]]);
                let hij = (s(1.0, 1.0) - s(1.0, -1.0) - s(-1.0, 1.0) + s(-1.0, -1.0)) / (4.0 * h * h);
                assert!((hij - jet.hess(i, j)).abs() < 1e-4, "hess {i}{j}: {hij} vs {}", jet.hess(i, j));
            }
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let p = [0.3, -0.7, 1.1];
        let f = |t: f64, x: f64, y: f64| (t * x).sin() * y.exp() / (1.0 + x * x) + (y / x).atan2(1.0) + (t + y).sqrt();
        let [t, x, y] = Jet::vars(p[0], p[1], p[2]);
        let j = (t * x).sin() * y.exp() / (1.0 + x * x) + (y / x).atan2(&Jet::constant(1.0)) + (t + y).sqrt();
        assert!((j.v - f(p[0], p[1], p[2])).abs() < 1e-14);
        fd_check(f, &j, p);
    }

    #[test]
    fn compose_is_chain_rule() {
        let p = [0.4, 0.2, -0.3];
        let [t, x, y] = Jet::vars(p[0], p[1], p[2]);
        let inner = [t * t + x, x.cos() * y, y.exp()];
        let [a, b, c] = Jet::vars(inner[0].v, inner[1].v, inner[2].v);
        let outer = a * b + c.ln() * a * a;
        let direct = inner[0] * inner[1] + inner[2].ln() * inner[0] * inner[0];
        let composed = Jet::compose(&outer, &inner);
        assert!((composed - direct).max_abs() < 1e-13);
    }

    #[test]
    fn jet3_partial_and_truncation() {
        let p = [0.2, 0.5, -0.4];
        let [t, x, y] = Jet3::vars(p[0], p[1], p[2]);
        let f3 = (x * y + t).exp() * (1.0 + x * x).ln() + (y / x).atan();
        let [tj, xj, yj] = Jet::vars(p[0], p[1], p[2]);
        let f2 = (xj * yj + tj).exp() * (1.0 + xj * xj).ln() + (yj / xj).atan();
        assert!((f3.to_jet() - f2).max_abs() < 1e-12);
        let fx = |t: f64, x: f64, y: f64| {
            let [tj, xj, yj] = Jet::vars(t, x, y);
            ((xj * yj + tj).exp() * (1.0 + xj * xj).ln() + (yj / xj).atan()).g[1]
        };
        let px = f3.partial(1);
        assert!((px.v - fx(p[0], p[1], p[2])).abs() < 1e-13);
        fd_check(fx, &px, p);
    }

    #[test]
    fn jet3_atan2_branches() {
        for &(x0, y0) in &[(1.0, 0.5), (0.2, 1.5), (-0.3, 2.0), (-1.0, -0.1)] {
            let [_, x, y] = Jet3::vars(0.0, x0, y0);
            let a = y.atan2(&x);
            let [_, xj, yj] = Jet::vars(0.0, x0, y0);
            let b = yj.atan2(&xj);
            assert!((a.to_jet() - b).max_abs() < 1e-12, "{x0},{y0}");
        }
    }
}
