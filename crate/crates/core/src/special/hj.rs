//! Roots of the implicit equation `z − i·a·t + F'(a) = 0` for a polynomial `F`, and the
//! induced Burgers field `u = −Im a`, `v = Re a` with `z = x + iy`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;

const MAX_ITER: usize = 100;
const RESIDUAL_TOL: f64 = 1e-12;
const MAX_DEGREE: usize = 6;
const CONTINUATION_STEPS: usize = 32;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `coeffs[k]` multiplies `a^k` in `F`; `deg F ≤ 6`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexRootProblem {
    pub coeffs: Vec<Complex64>,
    pub t: f64,
    pub z: Complex64,
}

fn horner(c: &[Complex64], a: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * a + ck)
}

/// Coefficients of the `n`-th derivative.
fn derivative(c: &[Complex64], n: usize) -> Vec<Complex64> {
    (n..c.len())
        .map(|k| c[k] * ((k + 1 - n)..=k).map(|j| j as f64).product::<f64>())
        .collect()
}

impl ComplexRootProblem {
    pub fn new(coeffs: Vec<Complex64>, t: f64, z: Complex64) -> Result<ComplexRootProblem> {
        let p = ComplexRootProblem { coeffs, t, z };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.degree() > MAX_DEGREE {
            return Err(Error::InvalidInput(format!("hj: deg F = {} exceeds {MAX_DEGREE}", self.degree())));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !self.t.is_finite() || !finite(&self.z) || !self.coeffs.iter().all(finite) {
            return Err(Error::InvalidInput("hj: non-finite data".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)).unwrap_or(0)
    }

    /// `F^(n)(a)`.
    pub fn f_deriv(&self, n: usize, a: Complex64) -> Complex64 {
        horner(&derivative(&self.coeffs, n), a)
    }

    pub fn residual(&self, a: Complex64) -> Complex64 {
        self.z - I * a * self.t + self.f_deriv(1, a)
    }

    /// `∂G/∂a = F''(a) − it`.
    pub fn jacobian(&self, a: Complex64) -> Complex64 {
        self.f_deriv(2, a) - I * self.t
    }

    /// Size of the terms entering the residual, for a relative stopping test.
    fn scale(&self, a: Complex64) -> f64 {
        let df = derivative(&self.coeffs, 1);
        let mut s = 1.0 + self.z.norm() + (a * self.t).norm();
        let mut p = 1.0;
        for c in &df {
            s += c.norm() * p;
            p *= a.norm();
        }
        s
    }
}

/// Newton iteration from `seed`.
pub fn hj_root(problem: &ComplexRootProblem, seed: Complex64) -> Result<Complex64> {
    problem.validate()?;
    let mut a = seed;
    for _ in 0..MAX_ITER {
        let g = problem.residual(a);
        let scale = problem.scale(a);
        if g.norm() < RESIDUAL_TOL {
            // one extra step to settle at rounding level, kept only if it helps
            let j = problem.jacobian(a);
            let b = a - g / j;
            return Ok(if problem.residual(b).norm() < g.norm() { b } else { a });
        }
        let j = problem.jacobian(a);
        if j.norm() <= 1e-14 * scale {
            return Err(Error::JacobianSingular(j.norm()));
        }
        let step = g / j;
        a -= step;
        if !(a.re.is_finite() && a.im.is_finite()) {
            break;
        }
        if step.norm() <= 1e-16 * (1.0 + a.norm()) {
            let g = problem.residual(a);
            if g.norm() < RESIDUAL_TOL {
                return Ok(a);
            }
        }
    }
    Err(Error::NoConvergence(MAX_ITER))
}

/// Branch label of the closed-form quadratic root `a = (−b ± √disc)/(2q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Root of the truncation `deg F ≤ 3`, where the equation is at most quadratic in `a`.
fn low_degree_root(c: &[Complex64], t: f64, z: Complex64, branch: Branch) -> Result<Complex64> {
    let get = |k: usize| c.get(k).copied().unwrap_or_default();
    // 3c3·a² + (2c2 − it)·a + (z + c1) = 0
    let q = 3.0 * get(3);
    let b = 2.0 * get(2) - I * t;
    let r = z + get(1);
    if q == Complex64::new(0.0, 0.0) {
        if b.norm() == 0.0 {
            return Err(Error::JacobianSingular(0.0));
        }
        return Ok(-r / b);
    }
    let disc = (b * b - 4.0 * q * r).sqrt();
    Ok((-b + branch.sign() * disc) / (2.0 * q))
}

/// Root on the named branch: closed form for `deg F ≤ 3`, polished by Newton; for higher
/// degrees the branch of the cubic truncation is continued to the full polynomial.
pub fn hj_branch_root(problem: &ComplexRootProblem, branch: Branch) -> Result<Complex64> {
    problem.validate()?;
    let cubic: Vec<Complex64> = problem.coeffs.iter().take(4).copied().collect();
    let mut a = low_degree_root(&cubic, problem.t, problem.z, branch)?;
    if problem.degree() <= 3 {
        return hj_root(problem, a);
    }
    for s in 1..=CONTINUATION_STEPS {
        let lambda = s as f64 / CONTINUATION_STEPS as f64;
        let coeffs = problem
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k > 3 { c * lambda } else { c })
            .collect();
        let step = ComplexRootProblem { coeffs, t: problem.t, z: problem.z };
        a = hj_root(&step, a)?;
    }
    Ok(a)
}

/// Second-order jet of `(u, v) = (−Im a, Re a)` in `(t, x, y)` at a root `a`.
pub fn hj_field_jet(problem: &ComplexRootProblem, a: Complex64) -> Result<[Jet; 2]> {
    let d = problem.jacobian(a);
    if d.norm() <= 1e-14 * problem.scale(a) {
        return Err(Error::JacobianSingular(d.norm()));
    }
    let f3 = problem.f_deriv(3, a);
    let a_z = -1.0 / d;
    let a_t = I * a / d;
    let d_t = f3 * a_t - I;
    let a_zz = -f3 * a_z * a_z / d;
    let a_zt = d_t / (d * d);
    let a_tt = (I * a_t - d_t * a_t) / d;
    // holomorphic in z = x + iy: ∂x = ∂z, ∂y = i∂z
    let g = [a_t, a_z, I * a_z];
    let h = [a_tt, a_zt, I * a_zt, a_zz, I * a_zz, -a_zz];
    let u = Jet { v: -a.im, g: g.map(|c| -c.im), h: h.map(|c| -c.im) };
    let v = Jet { v: a.re, g: g.map(|c| c.re), h: h.map(|c| c.re) };
    Ok([u, v])
}
