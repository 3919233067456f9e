//! The eight-dimensional symmetry algebra of the Burgers system as polynomial vector fields on
//! `(t, x, y, u, v)`, its commutation table and the lists of inequivalent subalgebras.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Point, SpaceTimeField};

/// Exponents of `(t, x, y, u, v)`.
pub type Monomial = [u8; 5];

pub const VARIABLES: [&str; 5] = ["t", "x", "y", "u", "v"];

/// Sparse polynomial in `(t, x, y, u, v)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly<T> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Num + Clone> Poly<T> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::term(c, [0; 5])
    }

    /// The coordinate function with index `i` in `(t, x, y, u, v)`.
    pub fn var(i: usize) -> Self {
        let mut m = [0; 5];
        m[i] = 1;
        Self::term(T::one(), m)
    }

    pub fn term(c: T, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: T) {
        let e = self.terms.entry(m).or_insert_with(T::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.iter().map(|e| *e as usize).sum()).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, c.clone() * s.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&(T::zero() - T::one())))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let mut m = [0; 5];
                for i in 0..5 {
                    m[i] = ma[i] + mb[i];
                }
                r.add_term(m, ca.clone() * cb.clone());
            }
        }
        r
    }

    pub fn diff(&self, i: usize) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut k = T::zero();
            for _ in 0..m[i] {
                k = k + T::one();
            }
            let mut mm = *m;
            mm[i] -= 1;
            r.add_term(mm, c.clone() * k);
        }
        r
    }

    pub fn map<S: Num + Clone>(&self, f: impl Fn(&T) -> S) -> Poly<S> {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, f(c));
        }
        r
    }
}

impl<T: Num + Clone + ToPrimitive> Poly<T> {
    pub fn eval(&self, z: &[f64; 5]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                for i in 0..5 {
                    v *= z[i].powi(m[i] as i32);
                }
                v
            })
            .sum()
    }
}

fn fmt_coeff<T: fmt::Display + Num + Clone + PartialOrd>(c: &T, first: bool, bare: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let neg = *c < T::zero();
    let a = if neg { T::zero() - c.clone() } else { c.clone() };
    if neg {
        write!(f, "{}", if first { "-" } else { " - " })?;
    } else if !first {
        write!(f, " + ")?;
    }
    if bare && a.is_one() {
        Ok(())
    } else {
        write!(f, "{a}")
    }
}

impl<T: fmt::Display + Num + Clone + PartialOrd> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let constant = m.iter().all(|e| *e == 0);
            fmt_coeff(c, k == 0, !constant, f)?;
            let mut first_var = !(c.is_one() || (T::zero() - c.clone()).is_one()) || constant;
            for (i, e) in m.iter().enumerate() {
                for _ in 0..*e {
                    if !first_var {
                        first_var = true;
                    } else {
                        write!(f, "*")?;
                    }
                    write!(f, "{}", VARIABLES[i])?;
                }
            }
        }
        Ok(())
    }
}

/// A first-order operator `ξᵗ∂t + ξˣ∂x + ξʸ∂y + ηᵘ∂u + ηᵛ∂v` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub coeffs: [Poly<T>; 5],
}

/// Exact vector fields of the algebra.
pub type VectorFieldG = VectorField<Rational64>;

impl<T: Num + Clone> VectorField<T> {
    pub fn zero() -> Self {
        VectorField { coeffs: std::array::from_fn(|_| Poly::zero()) }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        VectorField { coeffs: std::array::from_fn(|i| self.coeffs[i].add(&o.coeffs[i])) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        VectorField { coeffs: std::array::from_fn(|i| self.coeffs[i].sub(&o.coeffs[i])) }
    }

    pub fn scale(&self, s: &T) -> Self {
        VectorField { coeffs: std::array::from_fn(|i| self.coeffs[i].scale(s)) }
    }

    /// `self` applied to a polynomial.
    pub fn apply(&self, p: &Poly<T>) -> Poly<T> {
        let mut r = Poly::zero();
        for i in 0..5 {
            r = r.add(&self.coeffs[i].mul(&p.diff(i)));
        }
        r
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn map<S: Num + Clone>(&self, f: impl Fn(&T) -> S + Copy) -> VectorField<S> {
        VectorField { coeffs: std::array::from_fn(|i| self.coeffs[i].map(f)) }
    }
}

impl VectorFieldG {
    pub fn to_f64(&self) -> VectorField<f64> {
        self.map(|c| c.to_f64().unwrap_or(f64::NAN))
    }
}

/// Lie bracket `[a, b] = a(b) − b(a)` computed componentwise.
pub fn commutator<T: Num + Clone>(a: &VectorField<T>, b: &VectorField<T>) -> Result<VectorField<T>> {
    let r = VectorField { coeffs: std::array::from_fn(|i| a.apply(&b.coeffs[i]).sub(&b.apply(&a.coeffs[i]))) };
    let d = r.degree();
    if d > 2 {
        return Err(Error::DegreeOverflow(d));
    }
    Ok(r)
}

impl<T: fmt::Display + Num + Clone + PartialOrd> fmt::Display for VectorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            write!(f, "({c})∂{}", VARIABLES[i])?;
            any = true;
        }
        if !any {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Named basis elements of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Generator {
    Pt,
    D,
    Pi,
    J,
    Px,
    Py,
    Gx,
    Gy,
}

impl Generator {
    pub const ALL: [Generator; 8] =
        [Generator::Pt, Generator::D, Generator::Pi, Generator::J, Generator::Px, Generator::Py, Generator::Gx, Generator::Gy];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Pt => "P^t",
            Generator::D => "D",
            Generator::Pi => "Pi",
            Generator::J => "J",
            Generator::Px => "P^x",
            Generator::Py => "P^y",
            Generator::Gx => "G^x",
            Generator::Gy => "G^y",
        }
    }

    pub fn index(self) -> usize {
        Generator::ALL.iter().position(|g| *g == self).unwrap()
    }

    pub fn from_name(s: &str) -> Result<Generator> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace() && *c != '^' && *c != '_').collect();
        Ok(match norm.to_ascii_lowercase().as_str() {
            "pt" => Generator::Pt,
            "d" => Generator::D,
            "pi" | "π" | "Π" => Generator::Pi,
            "j" => Generator::J,
            "px" => Generator::Px,
            "py" => Generator::Py,
            "gx" => Generator::Gx,
            "gy" => Generator::Gy,
            _ => return Err(Error::InvalidInput(format!("unknown generator {s}"))),
        })
    }

    /// Whether the generator belongs to the radical `⟨J, P^x, P^y, G^x, G^y⟩`.
    pub fn in_radical(self) -> bool {
        !matches!(self, Generator::Pt | Generator::D | Generator::Pi)
    }

    pub fn field(self) -> VectorFieldG {
        let c = |n: i64| Poly::constant(Rational64::from_integer(n));
        let v = |i: usize| Poly::<Rational64>::var(i);
        let (t, x, y, u, w) = (v(0), v(1), v(2), v(3), v(4));
        let z = Poly::zero;
        let coeffs = match self {
            Generator::Pt => [c(1), z(), z(), z(), z()],
            Generator::D => [t.scale(&Rational64::from_integer(2)), x, y, u.scale(&Rational64::from_integer(-1)), w.scale(&Rational64::from_integer(-1))],
            Generator::Pi => {
                let tt = t.mul(&t);
                [tt, t.mul(&x), t.mul(&y), x.sub(&t.mul(&u)), y.sub(&t.mul(&w))]
            }
            Generator::J => [z(), y.scale(&Rational64::from_integer(-1)), x, w.scale(&Rational64::from_integer(-1)), u],
            Generator::Px => [z(), c(1), z(), z(), z()],
            Generator::Py => [z(), z(), c(1), z(), z()],
            Generator::Gx => [z(), t, z(), c(1), z()],
            Generator::Gy => [z(), z(), t, z(), c(1)],
        };
        VectorField { coeffs }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Linear combination of basis fields with the given coordinates.
pub fn combination<T: Num + Clone>(coords: &[T; 8], basis: &[VectorField<T>; 8]) -> VectorField<T> {
    let mut r = VectorField::zero();
    for (c, b) in coords.iter().zip(basis.iter()) {
        if !c.is_zero() {
            r = r.add(&b.scale(c));
        }
    }
    r
}

pub fn basis() -> [VectorFieldG; 8] {
    Generator::ALL.map(Generator::field)
}

/// Coordinates of an exact field in the basis, if it lies in the algebra.
pub fn coordinates(v: &VectorFieldG) -> Option<[Rational64; 8]> {
    // Each generator owns a distinctive monomial slot: read it off, then confirm by reconstruction.
    let pick = |i: usize, e: [u8; 5]| v.coeffs[i].coeff(&e);
    let pt = pick(0, [0; 5]);
    let d = pick(1, [0, 1, 0, 0, 0]);
    let pi = pick(0, [2, 0, 0, 0, 0]);
    let j = pick(2, [0, 1, 0, 0, 0]);
    let px = pick(1, [0; 5]);
    let py = pick(2, [0; 5]);
    let gx = pick(3, [0; 5]);
    let gy = pick(4, [0; 5]);
    let coords = [pt, d, pi, j, px, py, gx, gy];
    if combination(&coords, &basis()) == *v {
        Some(coords)
    } else {
        None
    }
}

/// The 8×8 table of coordinates of `[e_i, e_j]`.
pub fn commutation_table() -> [[[Rational64; 8]; 8]; 8] {
    let b = basis();
    let mut out = [[[Rational64::zero(); 8]; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let c = commutator(&b[i], &b[j]).expect("algebra is closed under degree two");
            out[i][j] = coordinates(&c).expect("algebra is closed");
        }
    }
    out
}

/// Human-readable rendering of a coordinate vector, such as `2P^t - G^x`.
pub fn format_coords<T: Clone + Into<f64>>(coords: &[T; 8]) -> String {
    let mut s = String::new();
    for (k, g) in Generator::ALL.iter().enumerate() {
        let c: f64 = coords[k].clone().into();
        if c == 0.0 {
            continue;
        }
        let mag = c.abs();
        if s.is_empty() {
            if c < 0.0 {
                s.push('-');
            }
        } else {
            s.push_str(if c < 0.0 { " - " } else { " + " });
        }
        if mag != 1.0 {
            s.push_str(&format!("{mag}"));
        }
        s.push_str(g.name());
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn rat_to_f64(r: &Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The table rendered as text rows `[A,B] = C`.
pub fn render_table() -> String {
    let t = commutation_table();
    let mut out = String::new();
    let w = 6;
    out.push_str(&format!("{:>w$}", "[.,.]"));
    for g in Generator::ALL {
        out.push_str(&format!(" | {:>w$}", g.name()));
    }
    out.push('\n');
    for (i, gi) in Generator::ALL.iter().enumerate() {
        out.push_str(&format!("{:>w$}", gi.name()));
        for j in 0..8 {
            let coords = t[i][j].map(|r| rat_to_f64(&r));
            out.push_str(&format!(" | {:>w$}", format_coords(&coords)));
        }
        out.push('\n');
    }
    out
}

/// Symbolic parameters that appear in subalgebra bases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SubalgebraParams {
    pub kappa: f64,
    pub mu: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterDomain {
    None,
    KappaBinary,
    KappaNonNegative,
    MuPositive,
    MuNonNegative,
    MuNuNonNegativeUnitOrZero,
}

impl ParameterDomain {
    pub fn describe(self) -> &'static str {
        match self {
            ParameterDomain::None => "",
            ParameterDomain::KappaBinary => "kappa in {0,1}",
            ParameterDomain::KappaNonNegative => "kappa >= 0",
            ParameterDomain::MuPositive => "mu > 0",
            ParameterDomain::MuNonNegative => "mu >= 0",
            ParameterDomain::MuNuNonNegativeUnitOrZero => "mu, nu >= 0, mu^2 + nu^2 in {0,1}",
        }
    }

    pub fn contains(self, p: &SubalgebraParams) -> bool {
        let finite = p.kappa.is_finite() && p.mu.is_finite() && p.nu.is_finite();
        finite
            && match self {
                ParameterDomain::None => true,
                ParameterDomain::KappaBinary => p.kappa == 0.0 || p.kappa == 1.0,
                ParameterDomain::KappaNonNegative => p.kappa >= 0.0,
                ParameterDomain::MuPositive => p.mu > 0.0,
                ParameterDomain::MuNonNegative => p.mu >= 0.0,
                ParameterDomain::MuNuNonNegativeUnitOrZero => {
                    let s = p.mu * p.mu + p.nu * p.nu;
                    p.mu >= 0.0 && p.nu >= 0.0 && (s == 0.0 || (s - 1.0).abs() < 1e-12)
                }
            }
    }

    /// Five admissible parameter samples.
    pub fn samples(self) -> Vec<SubalgebraParams> {
        let k = |kappa| SubalgebraParams { kappa, ..Default::default() };
        let m = |mu| SubalgebraParams { mu, ..Default::default() };
        match self {
            ParameterDomain::None => vec![SubalgebraParams::default(); 5],
            ParameterDomain::KappaBinary => vec![k(0.0), k(1.0), k(0.0), k(1.0), k(1.0)],
            ParameterDomain::KappaNonNegative => [0.0, 0.5, 1.0, 2.3, 7.0].map(k).to_vec(),
            ParameterDomain::MuPositive => [0.1, 0.5, 1.0, 2.3, 7.0].map(m).to_vec(),
            ParameterDomain::MuNonNegative => [0.0, 0.5, 1.0, 2.3, 7.0].map(m).to_vec(),
            ParameterDomain::MuNuNonNegativeUnitOrZero => [0.0, 0.3, 0.6, 0.9]
                .iter()
                .map(|&a: &f64| SubalgebraParams { kappa: 0.0, mu: a, nu: (1.0 - a * a).sqrt() })
                .chain(std::iter::once(SubalgebraParams::default()))
                .collect(),
        }
    }
}

/// One term `coefficient · generator` of a basis element. The coefficient is
/// `constant + kappa·k + mu·m + nu·n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub generator: Generator,
    pub constant: f64,
    pub kappa: f64,
    pub mu: f64,
    pub nu: f64,
}

impl Term {
    const fn c(generator: Generator, constant: f64) -> Term {
        Term { generator, constant, kappa: 0.0, mu: 0.0, nu: 0.0 }
    }
    const fn kappa(generator: Generator, k: f64) -> Term {
        Term { generator, constant: 0.0, kappa: k, mu: 0.0, nu: 0.0 }
    }
    const fn mu(generator: Generator, m: f64) -> Term {
        Term { generator, constant: 0.0, kappa: 0.0, mu: m, nu: 0.0 }
    }
    const fn nu(generator: Generator, n: f64) -> Term {
        Term { generator, constant: 0.0, kappa: 0.0, mu: 0.0, nu: n }
    }

    fn value(&self, p: &SubalgebraParams) -> f64 {
        self.constant + self.kappa * p.kappa + self.mu * p.mu + self.nu * p.nu
    }

    fn label(&self) -> String {
        let mut parts = Vec::new();
        for (v, name) in [(self.constant, ""), (self.kappa, "kappa"), (self.mu, "mu"), (self.nu, "nu")] {
            if v == 0.0 {
                continue;
            }
            let mag = if v.abs() == 1.0 && !name.is_empty() { String::new() } else { format!("{}", v.abs()) };
            parts.push((v < 0.0, format!("{mag}{name}")));
        }
        let mut s = String::new();
        for (k, (neg, p)) in parts.iter().enumerate() {
            if k > 0 {
                s.push_str(if *neg { "-" } else { "+" });
            } else if *neg {
                s.push('-');
            }
            s.push_str(p);
        }
        if parts.len() > 1 {
            s = format!("({s})");
        }
        if s == "1" {
            s.clear();
        } else if s == "-1" {
            s = "-".into();
        } else if !s.is_empty() {
            s.push('*');
        }
        format!("{s}{}", self.generator.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subalgebra {
    pub id: &'static str,
    pub basis: Vec<Vec<Term>>,
    pub domain: ParameterDomain,
}

impl Subalgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of the basis elements for concrete parameter values.
    pub fn coordinates(&self, p: &SubalgebraParams) -> Result<Vec<[f64; 8]>> {
        if !self.domain.contains(p) {
            return Err(Error::ParameterOutOfDomain(format!("{}: {}", self.id, self.domain.describe())));
        }
        Ok(self
            .basis
            .iter()
            .map(|el| {
                let mut c = [0.0; 8];
                for t in el {
                    c[t.generator.index()] += t.value(p);
                }
                c
            })
            .collect())
    }

    pub fn fields(&self, p: &SubalgebraParams) -> Result<Vec<VectorField<f64>>> {
        let b = basis().map(|f| f.to_f64());
        Ok(self.coordinates(p)?.iter().map(|c| combination(c, &b)).collect())
    }

    pub fn basis_labels(&self) -> Vec<String> {
        self.basis
            .iter()
            .map(|el| {
                let mut s = String::new();
                for (k, t) in el.iter().enumerate() {
                    let l = t.label();
                    if k > 0 && !l.starts_with('-') {
                        s.push('+');
                    }
                    s.push_str(&l);
                }
                s
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "id": self.id,
            "dim": self.dim(),
            "basis": self.basis_labels(),
            "parameter_domain": self.domain.describe(),
        })
    }
}

use Generator::*;

pub fn one_dimensional() -> Vec<Subalgebra> {
    use ParameterDomain as PD;
    vec![
        Subalgebra { id: "g1.1", basis: vec![vec![Term::c(Pt, 1.0), Term::kappa(J, 1.0)]], domain: PD::KappaBinary },
        Subalgebra { id: "g1.2", basis: vec![vec![Term::c(Pt, 1.0), Term::c(Gy, 1.0)]], domain: PD::None },
        Subalgebra { id: "g1.3", basis: vec![vec![Term::c(D, 1.0), Term::kappa(J, 2.0)]], domain: PD::KappaNonNegative },
        Subalgebra {
            id: "g1.4",
            basis: vec![vec![Term::c(Pt, 1.0), Term::c(Pi, 1.0), Term::kappa(J, 1.0)]],
            domain: PD::KappaNonNegative,
        },
        Subalgebra {
            id: "g1.5",
            basis: vec![vec![Term::c(Pt, 1.0), Term::c(Pi, 1.0), Term::c(J, 1.0), Term::mu(Gx, 1.0), Term::mu(Py, -1.0)]],
            domain: PD::MuPositive,
        },
        Subalgebra { id: "g1.6", basis: vec![vec![Term::c(J, 1.0)]], domain: PD::None },
        Subalgebra { id: "g1.7", basis: vec![vec![Term::c(Gx, 1.0), Term::c(Py, -1.0)]], domain: PD::None },
        Subalgebra { id: "g1.8", basis: vec![vec![Term::c(Py, 1.0)]], domain: PD::None },
    ]
}

pub fn two_dimensional() -> Vec<Subalgebra> {
    use ParameterDomain as PD;
    vec![
        Subalgebra { id: "g2.1", basis: vec![vec![Term::c(Pt, 1.0)], vec![Term::c(D, 1.0), Term::kappa(J, 1.0)]], domain: PD::KappaNonNegative },
        Subalgebra { id: "g2.2", basis: vec![vec![Term::c(Pt, 1.0)], vec![Term::c(J, 1.0)]], domain: PD::None },
        Subalgebra { id: "g2.3", basis: vec![vec![Term::c(D, 1.0)], vec![Term::c(J, 1.0)]], domain: PD::None },
        Subalgebra { id: "g2.4", basis: vec![vec![Term::c(Pt, 1.0), Term::c(Pi, 1.0)], vec![Term::c(J, 1.0)]], domain: PD::None },
        Subalgebra {
            id: "g2.5",
            basis: vec![
                vec![Term::c(Pt, 1.0), Term::c(Pi, 1.0), Term::c(J, 1.0), Term::mu(Gy, 1.0), Term::mu(Px, 1.0)],
                vec![Term::c(Gx, 1.0), Term::c(Py, -1.0)],
            ],
            domain: PD::MuNonNegative,
        },
        Subalgebra {
            id: "g2.6",
            basis: vec![vec![Term::c(Gx, 1.0), Term::c(Py, -1.0)], vec![Term::c(Gy, 1.0), Term::mu(Px, 1.0)]],
            domain: PD::MuPositive,
        },
        Subalgebra {
            id: "g2.7",
            basis: vec![vec![Term::c(Py, 1.0)], vec![Term::c(Pt, 1.0), Term::mu(Gx, 1.0), Term::nu(Gy, 1.0)]],
            domain: PD::MuNuNonNegativeUnitOrZero,
        },
        Subalgebra { id: "g2.8", basis: vec![vec![Term::c(Py, 1.0)], vec![Term::c(D, 1.0)]], domain: PD::None },
        Subalgebra { id: "g2.9", basis: vec![vec![Term::c(Py, 1.0)], vec![Term::c(Px, 1.0)]], domain: PD::None },
        Subalgebra { id: "g2.10", basis: vec![vec![Term::c(Py, 1.0)], vec![Term::c(Gy, 1.0)]], domain: PD::None },
        Subalgebra {
            id: "g2.11",
            basis: vec![vec![Term::c(Py, 1.0)], vec![Term::c(Gx, 1.0), Term::mu(Gy, 1.0)]],
            domain: PD::MuNonNegative,
        },
        Subalgebra { id: "g2.12", basis: vec![vec![Term::c(Py, 1.0)], vec![Term::c(Gy, 1.0), Term::c(Px, 1.0)]], domain: PD::None },
    ]
}

pub fn subalgebras(dim: usize) -> Result<Vec<Subalgebra>> {
    match dim {
        1 => Ok(one_dimensional()),
        2 => Ok(two_dimensional()),
        _ => Err(Error::InvalidInput(format!("subalgebra dimension must be 1 or 2, got {dim}"))),
    }
}

pub fn find_subalgebra(id: &str) -> Result<Subalgebra> {
    one_dimensional()
        .into_iter()
        .chain(two_dimensional())
        .find(|s| s.id == id)
        .ok_or_else(|| Error::InvalidInput(format!("unknown subalgebra {id}")))
}

/// Flatten the coefficients of several fields over their common monomial support.
fn flatten(fields: &[&VectorField<f64>]) -> Vec<Vec<f64>> {
    let mut keys: Vec<(usize, Monomial)> = Vec::new();
    for f in fields {
        for (i, c) in f.coeffs.iter().enumerate() {
            for (m, _) in c.terms() {
                if !keys.contains(&(i, *m)) {
                    keys.push((i, *m));
                }
            }
        }
    }
    fields.iter().map(|f| keys.iter().map(|(i, m)| f.coeffs[*i].coeff(m)).collect()).collect()
}

/// Largest coefficient of the residual of `target` after least-squares projection onto `span`.
pub fn projection_residual(span: &[VectorField<f64>], target: &VectorField<f64>) -> f64 {
    let mut all: Vec<&VectorField<f64>> = span.iter().collect();
    all.push(target);
    let flat = flatten(&all);
    let rhs = DVector::from_vec(flat[span.len()].clone());
    if span.is_empty() || rhs.is_empty() {
        return rhs.amax();
    }
    let n = rhs.len();
    let a = DMatrix::from_fn(n, span.len(), |r, c| flat[c][r]);
    let svd = a.clone().svd(true, true);
    let x = match svd.solve(&rhs, 1e-14) {
        Ok(x) => x,
        Err(_) => return rhs.amax(),
    };
    (a * x - rhs).amax()
}

/// Maximal projection residual of all pairwise commutators of the subalgebra basis.
pub fn closure_residual(fields: &[VectorField<f64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            let c = commutator(&fields[i], &fields[j])?;
            worst = worst.max(projection_residual(fields, &c));
        }
    }
    Ok(worst)
}

pub fn subalgebra_closure_check(s: &Subalgebra, params: &SubalgebraParams) -> Result<bool> {
    let f = s.fields(params)?;
    Ok(closure_residual(&f)? < 1e-12)
}

/// Characteristic `(ηᵘ − ξᵗu_t − ξˣu_x − ξʸu_y, ηᵛ − ξᵗv_t − ξˣv_x − ξʸv_y)` of `vf` on a field.
pub fn apply_to_field<T>(vf: &VectorField<T>, field: &dyn SpaceTimeField, p: &Point) -> Result<(f64, f64)>
where
    T: Num + Clone + ToPrimitive,
{
    let j = field.local(p)?;
    let z = [p.t, p.x, p.y, j[0].v, j[1].v];
    let xi = [vf.coeffs[0].eval(&z), vf.coeffs[1].eval(&z), vf.coeffs[2].eval(&z)];
    let eu = vf.coeffs[3].eval(&z);
    let ev = vf.coeffs[4].eval(&z);
    let q = |eta: f64, k: usize| eta - (0..3).map(|i| xi[i] * j[k].g[i]).sum::<f64>();
    Ok((q(eu, 0), q(ev, 1)))
}

/// Exact Jacobi sum `[a,[b,c]] + [b,[c,a]] + [c,[a,b]]`.
pub fn jacobi(a: &VectorFieldG, b: &VectorFieldG, c: &VectorFieldG) -> Result<VectorFieldG> {
    let t1 = commutator(a, &commutator(b, c)?)?;
    let t2 = commutator(b, &commutator(c, a)?)?;
    let t3 = commutator(c, &commutator(a, b)?)?;
    Ok(t1.add(&t2).add(&t3))
}

/// Float coordinates of an exact field.
pub fn coordinates_f64(v: &VectorFieldG) -> Option<[f64; 8]> {
    coordinates(v).map(|c| c.map(|r| rat_to_f64(&r)))
}

impl<T: Signed + Clone> Poly<T> {
    pub fn max_abs_coeff(&self) -> T
    where
        T: PartialOrd,
    {
        self.terms.values().map(|c| c.abs()).fold(T::zero(), |m, c| if c > m { c } else { m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FnField;
    use crate::jet::Jet;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn coords(pairs: &[(Generator, i64)]) -> [Rational64; 8] {
        let mut c = [r(0); 8];
        for (g, k) in pairs {
            c[g.index()] = r(*k);
        }
        c
    }

    #[test]
    fn bracket_examples() {
        let t = commutation_table();
        assert_eq!(t[Pt.index()][D.index()], coords(&[(Pt, 2)]));
        assert_eq!(t[J.index()][J.index()], coords(&[]));
        assert_eq!(t[Px.index()][Pi.index()], coords(&[(Gx, 1)]));
        assert_eq!(t[Pt.index()][Pi.index()], coords(&[(D, 1)]));
        assert_eq!(t[Gy.index()][J.index()], coords(&[(Gx, -1)]));
        assert_eq!(t[Px.index()][Py.index()], coords(&[]));
    }

    #[test]
    fn pi_coefficients() {
        let pi = Pi.field();
        assert_eq!(pi.coeffs[3], Poly::var(1).sub(&Poly::var(0).mul(&Poly::var(3))));
    }

    #[test]
    fn coordinates_reject_outsiders() {
        let mut f = Px.field();
        f.coeffs[3] = Poly::var(3);
        assert!(coordinates(&f).is_none());
    }

    #[test]
    fn closure_examples() {
        let s = find_subalgebra("g2.1").unwrap();
        assert!(subalgebra_closure_check(&s, &SubalgebraParams::default()).unwrap());
        let s = find_subalgebra("g1.4").unwrap();
        assert!(subalgebra_closure_check(&s, &SubalgebraParams { kappa: 1.0, ..Default::default() }).unwrap());
        let b = basis().map(|f| f.to_f64());
        assert!(closure_residual(&[b[Pt.index()].clone(), b[Pi.index()].clone()]).unwrap() > 0.5);
        let s = find_subalgebra("g1.1").unwrap();
        assert!(matches!(
            subalgebra_closure_check(&s, &SubalgebraParams { kappa: 0.5, ..Default::default() }),
            Err(Error::ParameterOutOfDomain(_))
        ));
    }

    #[test]
    fn characteristic_examples() {
        let zero = FnField::from_expr(|_| Ok([Jet::constant(0.0), Jet::constant(0.0)]));
        let p = Point::new(0.3, 0.1, -0.2).unwrap();
        assert_eq!(apply_to_field(&Pt.field(), &zero, &p).unwrap(), (0.0, 0.0));
        assert_eq!(apply_to_field(&Gx.field(), &zero, &p).unwrap(), (1.0, 0.0));
        let uy = FnField::from_expr(|[_, _, y]| Ok([y, Jet::constant(0.0)]));
        let q = Point::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(apply_to_field(&D.field(), &uy, &q).unwrap(), (-2.0, 0.0));
    }

    #[test]
    fn labels_render() {
        let s = find_subalgebra("g1.5").unwrap();
        assert_eq!(s.basis_labels(), vec!["P^t+Pi+J+mu*G^x-mu*P^y".to_string()]);
        let s = find_subalgebra("g1.3").unwrap();
        assert_eq!(s.basis_labels(), vec!["D+2kappa*J".to_string()]);
    }

    #[test]
    fn generator_names_round_trip() {
        for g in Generator::ALL {
            assert_eq!(Generator::from_name(g.name()).unwrap(), g);
        }
        assert!(Generator::from_name("Q").is_err());
    }
}
