//! Exact-solution families of the Burgers system.
//!
//! Every family has a typed constructor returning a field with analytic jets, and a
//! [`FamilySpec`] entry that builds the same field from JSON parameters together with its
//! metadata: test box, residual tolerance, differential constraints, invariance algebra and,
//! where one is known in closed form, a potential.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{swap_jet, FieldHandle, FnField, Grid, Permuted, Point};
use crate::heat_kit::{darboux_jet3, HeatAtom, HeatSolution1D, HeatSolution2D};
use crate::jet::{Jet, Jet3};
use crate::lie_algebra::Generator;
use crate::special::heun::HeunParams;
use crate::special::hj::{hj_branch_root, hj_field_jet, Branch, ComplexRootProblem};
use crate::special::lame::{lame_solve, pole_in, LameSolution};
use crate::special::wp::{real_period, wp_derivatives};

pub const TOL_ALGEBRAIC: f64 = 1e-10;
pub const TOL_WP: f64 = 1e-8;
pub const TOL_LAME: f64 = 1e-7;
pub const TOL_HEUN: f64 = 1e-5;

const SQRT6: f64 = 2.449_489_742_783_178;

/// Closed box in `(t, x, y)` on which a family is tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestBox {
    pub t: (f64, f64),
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl TestBox {
    pub const fn new(t: (f64, f64), x: (f64, f64), y: (f64, f64)) -> TestBox {
        TestBox { t, x, y }
    }

    pub fn grid(&self, n: [usize; 3]) -> Result<Grid> {
        Grid::uniform((self.t.0, self.t.1, n[0]), (self.x.0, self.x.1, n[1]), (self.y.0, self.y.1, n[2]))
    }

    /// The 5 × 6 × 6 grid used for residual checks.
    pub fn default_grid(&self) -> Grid {
        self.grid([5, 6, 6]).expect("test boxes are nondegenerate")
    }

    pub fn contains(&self, p: &Point) -> bool {
        let inside = |v: f64, r: (f64, f64)| r.0 <= v && v <= r.1;
        inside(p.t, self.t) && inside(p.x, self.x) && inside(p.y, self.y)
    }

    pub fn swapped(&self) -> TestBox {
        TestBox { t: self.t, x: self.y, y: self.x }
    }
}

/// Differential constraints a family satisfies identically.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConstraintFlags {
    /// `u_y = v_x`
    pub curl_free: bool,
    /// `u_x = v_y`
    pub ux_eq_vy: bool,
    /// `u_x + v_y = 0`
    pub div_free: bool,
    pub v_zero: bool,
}

/// Symmetry algebra under which the solution is invariant, as coordinates in the basis
/// `P^t, D, Π, J, P^x, P^y, G^x, G^y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariance {
    pub label: String,
    pub generators: Vec<[f64; 8]>,
}

impl Invariance {
    fn new(label: impl Into<String>, gens: &[&[(Generator, f64)]]) -> Invariance {
        let generators = gens
            .iter()
            .map(|terms| {
                let mut c = [0.0; 8];
                for &(g, k) in terms.iter() {
                    c[g.index()] += k;
                }
                c
            })
            .collect();
        Invariance { label: label.into(), generators }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `u = ψ_x`, `v = ψ_y`
    Gradient,
    /// `u = ψ_y`, `v = ψ_x`
    Swapped,
}

pub type ScalarJetFn = dyn Fn(&Point) -> Result<Jet> + Send + Sync;

#[derive(Clone)]
pub struct Potential {
    pub kind: PotentialKind,
    pub jet: Arc<ScalarJetFn>,
}

/// A built family member.
#[derive(Clone)]
pub struct FamilyInstance {
    pub family: &'static str,
    pub params: Value,
    pub field: FieldHandle,
    pub constraints: ConstraintFlags,
    pub invariance: Option<Invariance>,
    pub tolerance: f64,
    pub test_box: TestBox,
    pub potential: Option<Potential>,
}

impl FamilyInstance {
    pub fn metadata(&self) -> Value {
        json!({
            "family": self.family,
            "params": self.params,
            "constraints": self.constraints,
            "invariance": self.invariance,
            "tolerance": self.tolerance,
            "test_box": self.test_box,
            "potential": self.potential.as_ref().map(|p| p.kind),
        })
    }
}

type Builder = fn(&Value, &TestBox) -> Result<FamilyInstance>;

pub struct FamilySpec {
    pub id: &'static str,
    pub summary: &'static str,
    pub test_box: TestBox,
    builder: Builder,
    defaults: fn() -> Vec<Value>,
}

impl FamilySpec {
    /// Build on the family's own test box, rejecting parameters for which the field is
    /// singular somewhere on the default grid.
    pub fn build(&self, params: &Value) -> Result<FamilyInstance> {
        self.build_in(params, &self.test_box)
    }

    pub fn build_in(&self, params: &Value, test_box: &TestBox) -> Result<FamilyInstance> {
        let inst = (self.builder)(params, test_box)?;
        screen(&inst)?;
        Ok(inst)
    }

    /// Three parameter sets whose fields are regular on the test box.
    pub fn default_params(&self) -> Vec<Value> {
        (self.defaults)()
    }
}

fn screen(inst: &FamilyInstance) -> Result<()> {
    for p in inst.test_box.default_grid().points() {
        if inst.field.is_singular(&p) {
            return Err(Error::ZeroDenominator(format!("{}: field singular at {p}", inst.family)));
        }
        let j = inst.field.local(&p)?;
        if !(j[0].is_finite() && j[1].is_finite()) {
            return Err(Error::ZeroDenominator(format!("{}: non-finite field at {p}", inst.family)));
        }
    }
    Ok(())
}

pub fn families() -> &'static [FamilySpec] {
    &FAMILIES
}

pub fn family(id: &str) -> Result<&'static FamilySpec> {
    FAMILIES.iter().find(|f| f.id == id).ok_or_else(|| Error::InvalidInput(format!("unknown family {id}")))
}

const BOX_T: TestBox = TestBox::new((0.5, 2.0), (-1.0, 1.0), (-1.0, 1.0));
const BOX_STATIONARY: TestBox = TestBox::new((0.0, 1.0), (0.5, 2.0), (0.5, 2.0));
const BOX_Y: TestBox = TestBox::new((0.5, 2.0), (-1.0, 1.0), (0.5, 2.0));

static FAMILIES: [FamilySpec; 13] = [
    FamilySpec {
        id: "hopf_cole_2d",
        summary: "u = -2 phi_x/phi, v = -2 phi_y/phi with phi solving phi_t = phi_xx + phi_yy",
        test_box: BOX_T,
        builder: build_hopf_cole,
        defaults: defaults_hopf_cole,
    },
    FamilySpec {
        id: "shift_invariant",
        summary: "u = -2 theta1_x/theta1, v = theta2/theta1 with theta1, theta2 solving the heat equation in (t, x)",
        test_box: BOX_T,
        builder: build_shift_invariant,
        defaults: defaults_shift_invariant,
    },
    FamilySpec {
        id: "affine_in_y",
        summary: "u = -2 theta1_x/theta1, v = (-2 y theta1_x/theta1 + theta0/theta1)_x",
        test_box: BOX_T,
        builder: build_affine_in_y,
        defaults: defaults_theta_pair,
    },
    FamilySpec {
        id: "affine_in_x",
        summary: "mirror image of affine_in_y under (x, u) <-> (y, v); theta1, theta0 depend on (t, y)",
        test_box: BOX_T,
        builder: build_affine_in_x,
        defaults: defaults_theta_pair,
    },
    FamilySpec {
        id: "stationary_similarity",
        summary: "u = phi1(x/y)/y, v = phi2/y with phi2 in {0, -2}, phi1 = -2(1+w^2) psi'/psi",
        test_box: BOX_STATIONARY,
        builder: build_stationary,
        defaults: defaults_stationary,
    },
    FamilySpec {
        id: "affine_general",
        summary: "(u, v) = (tE + C)^-1 ((x, y) + b0)",
        test_box: BOX_T,
        builder: build_affine_general,
        defaults: defaults_affine_general,
    },
    FamilySpec {
        id: "affine_degenerate",
        summary: "canonical affine solutions: u = (x + c1 y)/t; u = y; constant (c1, c2); v = 0 in the first two",
        test_box: BOX_T,
        builder: build_affine_degenerate,
        defaults: defaults_affine_degenerate,
    },
    FamilySpec {
        id: "ns_common",
        summary: "u = a1 w + a0, v = a2 w, w = w(t, a2 x - a1 y) with w_t + a0 a2 w_z = w_zz; also divergence free",
        test_box: BOX_T,
        builder: build_ns_common,
        defaults: defaults_ns_common,
    },
    FamilySpec {
        id: "potential_reduction",
        summary: "u = -(x/y^2) phi_w, v = phi_w/y + 2 varsigma/x with phi_w solving a Riccati equation in w = x/y",
        test_box: TestBox::new((0.0, 1.0), (0.2, 0.4), (1.0, 2.0)),
        builder: build_potential_reduction,
        defaults: defaults_potential_reduction,
    },
    FamilySpec {
        id: "hj_family",
        summary: "u = -Im a, v = Re a where x + iy - i a t + F'(a) = 0 for a complex polynomial F",
        test_box: TestBox::new((0.5, 2.0), (-1.0, 1.0), (0.5, 1.5)),
        builder: build_hj,
        defaults: defaults_hj,
    },
    FamilySpec {
        id: "weierstrass",
        summary: "u = wp(y/sqrt6 + C2; 0, C1) x + e^(C3 t) phi(y/sqrt6 + C2), v = 0, phi solving the Lame equation",
        test_box: TestBox::new((0.0, 1.0), (-1.0, 1.0), (0.5, 2.0)),
        builder: build_weierstrass,
        defaults: defaults_weierstrass,
    },
    FamilySpec {
        id: "darboux",
        summary: "u = 6x/y^2 + theta_yy - 3 theta_y/y + 3 theta/y^2, v = 0 with theta solving the heat equation in (t, y)",
        test_box: BOX_Y,
        builder: build_darboux,
        defaults: defaults_darboux,
    },
    FamilySpec {
        id: "heun",
        summary: "u = w1(t, y) x + w0(t, y), v = 0 with w0 built from confluent Heun functions",
        test_box: BOX_Y,
        builder: build_heun,
        defaults: defaults_heun,
    },
];

fn parse<T: DeserializeOwned>(family: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("{family}: {e}")))
}

fn finite(family: &str, vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{family}: non-finite parameter")))
    }
}

fn instance(family: &'static str, params: &Value, field: FieldHandle, test_box: &TestBox) -> FamilyInstance {
    FamilyInstance {
        family,
        params: params.clone(),
        field,
        constraints: ConstraintFlags::default(),
        invariance: None,
        tolerance: TOL_ALGEBRAIC,
        test_box: *test_box,
        potential: None,
    }
}

/// `θ` must keep one sign on the `(s, q)` samples taken from the grid.
fn heat_nonvanishing(theta: &HeatSolution1D, test_box: &TestBox, qvar: usize) -> Result<()> {
    let samples: Vec<(f64, f64)> =
        test_box.grid([9, 13, 13])?.points().iter().map(|p| (p.t, if qvar == 1 { p.x } else { p.y })).collect();
    if samples.iter().any(|&(s, _)| theta.is_singular(s)) {
        return Err(Error::ZeroDenominator("heat solution undefined on the test box".into()));
    }
    theta.check_nonvanishing(&samples)
}

fn powi3(j: Jet3, n: usize) -> Jet3 {
    (0..n).fold(Jet3::constant(1.0), |acc, _| acc * j)
}

/// Value and first two derivatives of a univariate jet.
fn taylor(j: &Jet) -> (f64, f64, f64) {
    (j.v, j.g[0], j.h[0])
}

// ---------------------------------------------------------------------------
// Heat-equation based families

pub fn hopf_cole_2d(phi: &HeatSolution2D) -> FieldHandle {
    let (phi, guard) = (phi.clone(), phi.clone());
    FnField::new(move |p| {
        let f = phi.jet3(p.t, p.x, p.y);
        let inv = f.to_jet().recip();
        Ok([f.partial(1) * inv * -2.0, f.partial(2) * inv * -2.0])
    })
    .with_singular(move |p| guard.is_singular(p.t) || guard.value(p.t, p.x, p.y) == 0.0)
    .handle()
}

/// `ψ = −2 ln|φ|`, the potential of [`hopf_cole_2d`].
pub fn hopf_cole_potential(phi: &HeatSolution2D) -> Potential {
    let phi = phi.clone();
    Potential {
        kind: PotentialKind::Gradient,
        jet: Arc::new(move |p| Ok(phi.jet3(p.t, p.x, p.y).to_jet().abs().ln() * -2.0)),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HopfColeParams {
    phi: Value,
}

fn build_hopf_cole(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: HopfColeParams = parse("hopf_cole_2d", params)?;
    let phi = HeatSolution2D::from_json(&p.phi)?;
    let pts: Vec<[f64; 3]> = b.grid([9, 13, 13])?.points().iter().map(|p| p.coords()).collect();
    if pts.iter().any(|c| phi.is_singular(c[0])) {
        return Err(Error::ZeroDenominator("hopf_cole_2d: phi undefined on the test box".into()));
    }
    phi.check_nonvanishing(&pts)?;
    let mut inst = instance("hopf_cole_2d", params, hopf_cole_2d(&phi), b);
    inst.constraints.curl_free = true;
    inst.potential = Some(hopf_cole_potential(&phi));
    Ok(inst)
}

fn defaults_hopf_cole() -> Vec<Value> {
    let cosh = HeatSolution1D::cosh_mode(1.0);
    let gauss = HeatSolution2D::constant(1.0).plus(HeatSolution2D::gauss(0.0, 0.2, -0.1).scaled(2.0));
    let mixed = HeatSolution2D::product(1.0, cosh.clone(), cosh.clone())
        .plus(HeatSolution2D::from_y(HeatSolution1D::atom(0.5, HeatAtom::Exp { lambda: 1.5, sign: -1.0 })));
    vec![
        json!({"phi": HeatSolution2D::from_x(cosh).to_json()}),
        json!({"phi": gauss.to_json()}),
        json!({"phi": mixed.to_json()}),
    ]
}

fn theta_guard(theta: &HeatSolution1D) -> impl Fn(f64, f64) -> bool + Send + Sync + 'static {
    let theta = theta.clone();
    move |t, q| theta.is_singular(t) || theta.value(t, q) == 0.0
}

pub fn shift_invariant(theta1: &HeatSolution1D, theta2: &HeatSolution1D) -> FieldHandle {
    let (a, b) = (theta1.clone(), theta2.clone());
    let guard = theta_guard(theta1);
    FnField::new(move |p| {
        let den = a.jet3(p.t, p.x, 1, 0);
        let u = a.jet3(p.t, p.x, 1, 1) / den * -2.0;
        let v = b.jet3(p.t, p.x, 1, 0) / den;
        Ok([u.to_jet(), v.to_jet()])
    })
    .with_singular(move |p| guard(p.t, p.x))
    .handle()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaPair {
    theta1: Value,
    theta0: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftParams {
    theta1: Value,
    theta2: Value,
}

fn theta_pair(family: &str, params: &Value) -> Result<(HeatSolution1D, HeatSolution1D)> {
    let p: ThetaPair = parse(family, params)?;
    Ok((HeatSolution1D::from_json(&p.theta1)?, HeatSolution1D::from_json(&p.theta0)?))
}

fn is_zero(theta: &HeatSolution1D) -> bool {
    theta.terms.iter().all(|(c, _)| *c == 0.0)
}

fn build_shift_invariant(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: ShiftParams = parse("shift_invariant", params)?;
    let (t1, t2) = (HeatSolution1D::from_json(&p.theta1)?, HeatSolution1D::from_json(&p.theta2)?);
    heat_nonvanishing(&t1, b, 1)?;
    let mut inst = instance("shift_invariant", params, shift_invariant(&t1, &t2), b);
    inst.constraints.v_zero = is_zero(&t2);
    inst.invariance = Some(Invariance::new("<P^y>", &[&[(Generator::Py, 1.0)]]));
    Ok(inst)
}

/// `ψ = −2yθ¹_x/θ¹ + θ⁰/θ¹` in `(t, x, y)`; the field is `(ψ_y, ψ_x)`.
fn affine_in_y_potential(a: &HeatSolution1D, b: &HeatSolution1D, p: &Point) -> Jet3 {
    let den = a.jet3(p.t, p.x, 1, 0);
    Jet3::var(2, p.y) * a.jet3(p.t, p.x, 1, 1) / den * -2.0 + b.jet3(p.t, p.x, 1, 0) / den
}

pub fn affine_in_y(theta1: &HeatSolution1D, theta0: &HeatSolution1D) -> FieldHandle {
    let (a, b) = (theta1.clone(), theta0.clone());
    let guard = theta_guard(theta1);
    FnField::new(move |p| {
        let psi = affine_in_y_potential(&a, &b, p);
        Ok([psi.partial(2), psi.partial(1)])
    })
    .with_singular(move |p| guard(p.t, p.x))
    .handle()
}

/// Image of [`affine_in_y`] under `(x, u) ↔ (y, v)`; the heat solutions depend on `(t, y)`.
pub fn affine_in_x(theta1: &HeatSolution1D, theta0: &HeatSolution1D) -> FieldHandle {
    Arc::new(Permuted(affine_in_y(theta1, theta0)))
}

fn build_affine_in_y(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let (t1, t0) = theta_pair("affine_in_y", params)?;
    heat_nonvanishing(&t1, b, 1)?;
    let mut inst = instance("affine_in_y", params, affine_in_y(&t1, &t0), b);
    inst.constraints.ux_eq_vy = true;
    let (a, c) = (t1, t0);
    inst.potential = Some(Potential {
        kind: PotentialKind::Swapped,
        jet: Arc::new(move |p| Ok(affine_in_y_potential(&a, &c, p).to_jet())),
    });
    Ok(inst)
}

fn build_affine_in_x(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let (t1, t0) = theta_pair("affine_in_x", params)?;
    heat_nonvanishing(&t1, b, 2)?;
    let mut inst = instance("affine_in_x", params, affine_in_x(&t1, &t0), b);
    inst.constraints.ux_eq_vy = true;
    let (a, c) = (t1, t0);
    inst.potential = Some(Potential {
        kind: PotentialKind::Swapped,
        jet: Arc::new(move |p| {
            let q = Point { t: p.t, x: p.y, y: p.x };
            Ok(swap_jet(&affine_in_y_potential(&a, &c, &q).to_jet()))
        }),
    });
    Ok(inst)
}

fn theta_sets(second: &str) -> Vec<Value> {
    let exp_minus = HeatSolution1D::atom(1.0, HeatAtom::Exp { lambda: 1.0, sign: -1.0 });
    let one_plus = exp_minus.clone().with(1.0, HeatAtom::Poly { n: 0 });
    let two_plus_q = HeatSolution1D::constant(2.0).with(1.0, HeatAtom::Poly { n: 1 });
    let mixed = HeatSolution1D::heat_polynomial(2).unwrap().with(1.0, HeatAtom::Trig { lambda: 1.0, phase: 0.3 });
    [
        (HeatSolution1D::cosh_mode(1.0), HeatSolution1D::zero()),
        (one_plus, exp_minus),
        (two_plus_q, mixed),
    ]
    .iter()
    .map(|(a, b)| {
        let mut m = serde_json::Map::new();
        m.insert("theta1".into(), a.to_json());
        m.insert(second.into(), b.to_json());
        Value::Object(m)
    })
    .collect()
}

fn defaults_theta_pair() -> Vec<Value> {
    theta_sets("theta0")
}

fn defaults_shift_invariant() -> Vec<Value> {
    theta_sets("theta2")
}

// ---------------------------------------------------------------------------
// Stationary similarity solutions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationaryForm {
    /// Exponential and trigonometric expressions in `atan ω`.
    #[default]
    Closed,
    /// Polynomial rewriting, available when `β` is an integer.
    Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryCase {
    pub phi2: f64,
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub form: StationaryForm,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(P, Q)` with `(ω + i)^β = P + iQ`.
fn poly_pq(w: Jet3, beta: usize) -> (Jet3, Jet3) {
    let mut p = Jet3::constant(0.0);
    let mut q = Jet3::constant(0.0);
    for i in 0..=beta / 2 {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        p = p + powi3(w, beta - 2 * i) * (sign * binomial(beta, 2 * i));
        if 2 * i + 1 <= beta {
            q = q + powi3(w, beta - 2 * i - 1) * (sign * binomial(beta, 2 * i + 1));
        }
    }
    (p, q)
}

fn integer_beta(beta: f64) -> Result<usize> {
    let r = beta.round();
    if (beta - r).abs() > 1e-12 || r < 1.0 {
        return Err(Error::InvalidCase(format!("polynomial form needs a positive integer beta, got {beta}")));
    }
    Ok(r as usize)
}

impl StationaryCase {
    fn validate(&self) -> Result<()> {
        finite("stationary_similarity", &[self.phi2, self.a, self.c1, self.c2])?;
        if self.phi2 != 0.0 && self.phi2 != -2.0 {
            return Err(Error::InvalidCase(format!("phi2 must be 0 or -2, got {}", self.phi2)));
        }
        if self.c1 == 0.0 && self.c2 == 0.0 {
            return Err(Error::InvalidCase("(C1, C2) = (0, 0)".into()));
        }
        if self.form == StationaryForm::Poly {
            self.poly_beta()?;
        }
        Ok(())
    }

    fn poly_beta(&self) -> Result<usize> {
        let beta = if self.phi2 == 0.0 {
            if self.a >= 1.0 || self.a == 0.0 {
                return Err(Error::InvalidCase("polynomial form needs A < 1, A != 0".into()));
            }
            integer_beta((1.0 - self.a).sqrt())?
        } else {
            if self.a >= 0.0 {
                return Err(Error::InvalidCase("polynomial form needs A < 0".into()));
            }
            integer_beta((-self.a).sqrt())?
        };
        Ok(beta)
    }

    /// `ψ(ω)` as a univariate third-order jet (variable slot 0).
    pub fn psi(&self, omega: f64) -> Result<Jet3> {
        let StationaryCase { phi2, a, c1, c2, form } = *self;
        let w = Jet3::var(0, omega);
        let zeta = w.atan();
        let q = (w * w + 1.0).sqrt();
        if form == StationaryForm::Poly {
            let beta = self.poly_beta()?;
            let bf = beta as f64;
            let (pp, qq) = poly_pq(w, beta);
            return Ok(if phi2 == 0.0 {
                ((w * pp + qq * bf) * c1 + (w * qq - pp * bf) * c2) / (w * w + 1.0).powf((bf + 1.0) / 2.0)
            } else {
                (pp * c1 + qq * c2) / (w * w + 1.0).powf(bf / 2.0)
            });
        }
        Ok(if phi2 == 0.0 {
            if a == 0.0 {
                (zeta + w / (w * w + 1.0)) * c2 + c1
            } else if a == 1.0 {
                (w * c1 + (w * zeta + 1.0) * c2) / q
            } else if a > 1.0 {
                let al = (a - 1.0).sqrt();
                ((w - al) * (zeta * -al).exp() * c1 + (w + al) * (zeta * al).exp() * c2) / q
            } else {
                let be = (1.0 - a).sqrt();
                let (cs, sn) = ((zeta * be).cos(), (zeta * be).sin());
                ((w * cs - sn * be) * c1 + (w * sn + cs * be) * c2) / q
            }
        } else if a == 0.0 {
            zeta * c2 + c1
        } else if a > 0.0 {
            let al = a.sqrt();
            (zeta * -al).exp() * c1 + (zeta * al).exp() * c2
        } else {
            let be = (-a).sqrt();
            (zeta * be).cos() * c1 + (zeta * be).sin() * c2
        })
    }

    /// `φ¹ = −2(1+ω²)ψ_ω/ψ` as a univariate second-order jet.
    pub fn phi1(&self, omega: f64) -> Result<Jet> {
        let psi = self.psi(omega)?;
        if psi.value().abs() < 1e-12 {
            return Err(Error::ZeroDenominator(format!("psi vanishes at omega = {omega}")));
        }
        let w = Jet::var(0, omega);
        Ok((w * w + 1.0) * psi.partial(0) / psi.to_jet() * -2.0)
    }
}

pub fn stationary_similarity(case: StationaryCase) -> Result<FieldHandle> {
    case.validate()?;
    Ok(FnField::new(move |p| {
        if p.y == 0.0 {
            return Err(p.singular_error());
        }
        let [_, x, y] = Jet::vars(p.t, p.x, p.y);
        let omega = x / y;
        let (f0, f1, f2) = taylor(&case.phi1(omega.v)?);
        let inv = y.recip();
        Ok([omega.chain(f0, f1, f2) * inv, inv * case.phi2])
    })
    .with_singular(move |p| p.y == 0.0 || case.psi(p.x / p.y).map_or(true, |s| s.value().abs() < 1e-12))
    .handle())
}

fn build_stationary(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let case: StationaryCase = parse("stationary_similarity", params)?;
    let field = stationary_similarity(case)?;
    // ψ must keep its sign along the ω-range of the box
    let (lo, hi) = (b.x.0 / b.y.1, b.x.1 / b.y.0);
    if b.y.0 <= 0.0 {
        return Err(Error::ZeroDenominator("stationary_similarity: test box meets y = 0".into()));
    }
    let vals: Vec<f64> = (0..=400)
        .map(|k| case.psi(lo + (hi - lo) * k as f64 / 400.0).map(|s| s.value()))
        .collect::<Result<_>>()?;
    if vals.iter().any(|v| v.abs() < 1e-12 || v.signum() != vals[0].signum()) {
        return Err(Error::ZeroDenominator("stationary_similarity: psi vanishes on the test box".into()));
    }
    let mut inst = instance("stationary_similarity", params, field, b);
    inst.constraints.v_zero = case.phi2 == 0.0;
    inst.invariance = Some(Invariance::new("<P^t, D>", &[&[(Generator::Pt, 1.0)], &[(Generator::D, 1.0)]]));
    Ok(inst)
}

fn defaults_stationary() -> Vec<Value> {
    vec![
        json!({"phi2": 0.0, "a": 1.0, "c1": 1.0, "c2": 0.0}),
        json!({"phi2": -2.0, "a": 0.0, "c1": 1.0, "c2": 0.5}),
        json!({"phi2": 0.0, "a": -3.0, "c1": 0.0, "c2": 1.0, "form": "poly"}),
    ]
}

// ---------------------------------------------------------------------------
// Affine families

/// `(u, v) = (tE + C)⁻¹((x, y) + b0)`.
pub fn affine_general(c: [[f64; 2]; 2], b0: [f64; 2]) -> FieldHandle {
    let det = move |t: f64| (t + c[0][0]) * (t + c[1][1]) - c[0][1] * c[1][0];
    FnField::new(move |p| {
        let [t, x, y] = Jet::vars(p.t, p.x, p.y);
        let inv = ((t + c[0][0]) * (t + c[1][1]) - c[0][1] * c[1][0]).recip();
        let (xs, ys) = (x + b0[0], y + b0[1]);
        let u = ((t + c[1][1]) * xs - ys * c[0][1]) * inv;
        let v = ((t + c[0][0]) * ys - xs * c[1][0]) * inv;
        Ok([u, v])
    })
    .with_singular(move |p| det(p.t).abs() < 1e-12)
    .handle()
}

/// Real roots of `det(tE + C)`.
fn singular_times(c: [[f64; 2]; 2]) -> Vec<f64> {
    let (tr, det) = (c[0][0] + c[1][1], c[0][0] * c[1][1] - c[0][1] * c[1][0]);
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return vec![];
    }
    vec![(-tr - disc.sqrt()) / 2.0, (-tr + disc.sqrt()) / 2.0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineParams {
    c: [[f64; 2]; 2],
    #[serde(default)]
    b0: [f64; 2],
}

fn build_affine_general(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let AffineParams { c, b0 } = parse("affine_general", params)?;
    finite("affine_general", &[c[0][0], c[0][1], c[1][0], c[1][1], b0[0], b0[1]])?;
    if let Some(&t) = singular_times(c).iter().find(|&&t| b.t.0 - 0.1 <= t && t <= b.t.1 + 0.1) {
        return Err(Error::SingularTime(t));
    }
    let mut inst = instance("affine_general", params, affine_general(c, b0), b);
    inst.constraints.curl_free = c[0][1] == c[1][0];
    inst.constraints.ux_eq_vy = c[0][0] == c[1][1];
    inst.invariance = Some(Invariance::new(
        "<G^x + C11 P^x + C21 P^y, G^y + C12 P^x + C22 P^y>",
        &[
            &[(Generator::Gx, 1.0), (Generator::Px, c[0][0]), (Generator::Py, c[1][0])],
            &[(Generator::Gy, 1.0), (Generator::Px, c[0][1]), (Generator::Py, c[1][1])],
        ],
    ));
    Ok(inst)
}

fn defaults_affine_general() -> Vec<Value> {
    vec![
        json!({"c": [[0.0, 1.0], [-1.0, 0.0]], "b0": [0.0, 0.0]}),
        json!({"c": [[1.0, 0.0], [0.0, 1.0]], "b0": [1.0, 0.0]}),
        json!({"c": [[1.0, 0.5], [0.5, 2.0]], "b0": [0.3, -0.2]}),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DegenerateKind {
    /// `u = (x + c1 y)/t`, `v = 0`.
    TraceNonzero { c1: f64 },
    /// `u = y`, `v = 0`.
    Nilpotent,
    /// `(u, v) = (c1, c2)`.
    Constant { c1: f64, c2: f64 },
}

pub fn affine_degenerate(kind: DegenerateKind) -> FieldHandle {
    FnField::from_expr(move |[t, x, y]| {
        Ok(match kind {
            DegenerateKind::TraceNonzero { c1 } => {
                if t.v == 0.0 {
                    return Err(Error::SingularTime(0.0));
                }
                [(x + y * c1) / t, Jet::constant(0.0)]
            }
            DegenerateKind::Nilpotent => [y, Jet::constant(0.0)],
            DegenerateKind::Constant { c1, c2 } => [Jet::constant(c1), Jet::constant(c2)],
        })
    })
    .with_singular(move |p| matches!(kind, DegenerateKind::TraceNonzero { .. }) && p.t == 0.0)
    .handle()
}

fn build_affine_degenerate(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let kind: DegenerateKind = parse("affine_degenerate", params)?;
    let mut inst = instance("affine_degenerate", params, affine_degenerate(kind), b);
    let g = |gs: &[Generator]| gs.iter().map(|&g| vec![(g, 1.0)]).collect::<Vec<_>>();
    let (label, gens): (&str, Vec<Vec<(Generator, f64)>>) = match kind {
        DegenerateKind::TraceNonzero { c1 } => {
            finite("affine_degenerate", &[c1])?;
            if b.t.0 <= 0.0 && b.t.1 >= 0.0 {
                return Err(Error::SingularTime(0.0));
            }
            inst.constraints = ConstraintFlags { curl_free: c1 == 0.0, v_zero: true, ..Default::default() };
            ("<D, c1 P^x - P^y>", vec![vec![(Generator::D, 1.0)], vec![(Generator::Px, c1), (Generator::Py, -1.0)]])
        }
        DegenerateKind::Nilpotent => {
            inst.constraints = ConstraintFlags { curl_free: false, ux_eq_vy: true, div_free: true, v_zero: true };
            ("<P^t, P^x>", g(&[Generator::Pt, Generator::Px]))
        }
        DegenerateKind::Constant { c1, c2 } => {
            finite("affine_degenerate", &[c1, c2])?;
            inst.constraints = ConstraintFlags { curl_free: true, ux_eq_vy: true, div_free: true, v_zero: c2 == 0.0 };
            ("<P^t, P^x, P^y>", g(&[Generator::Pt, Generator::Px, Generator::Py]))
        }
    };
    let refs: Vec<&[(Generator, f64)]> = gens.iter().map(|v| v.as_slice()).collect();
    inst.invariance = Some(Invariance::new(label, &refs));
    Ok(inst)
}

fn defaults_affine_degenerate() -> Vec<Value> {
    vec![
        json!({"kind": "trace_nonzero", "c1": 2.0}),
        json!({"kind": "nilpotent"}),
        json!({"kind": "constant", "c1": 1.0, "c2": -0.5}),
    ]
}

// ---------------------------------------------------------------------------
// Common solutions of the Burgers and Navier–Stokes systems

/// `u = a1·w + a0`, `v = a2·w` with `(a1, a2) = (cos angle, sin angle)` and
/// `w(t, z) = θ(t, z − a0·a2·t)`, `z = a2·x − a1·y`, so that `w_t + a0·a2·w_z = w_zz`.
pub fn ns_common(a0: f64, angle: f64, theta: &HeatSolution1D) -> FieldHandle {
    let (a1, a2) = (angle.cos(), angle.sin());
    let (theta, guard) = (theta.clone(), theta.clone());
    FnField::new(move |p| {
        let w = theta.jet3_linear(p.coords(), [-a0 * a2, a2, -a1], 0.0, 0).to_jet();
        Ok([w * a1 + a0, w * a2])
    })
    .with_singular(move |p| guard.is_singular(p.t))
    .handle()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NsCommonParams {
    a0: f64,
    angle: f64,
    w: Value,
}

fn build_ns_common(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: NsCommonParams = parse("ns_common", params)?;
    finite("ns_common", &[p.a0, p.angle])?;
    let theta = HeatSolution1D::from_json(&p.w)?;
    if theta.is_singular(b.t.0) {
        return Err(Error::ZeroDenominator("ns_common: w undefined on the test box".into()));
    }
    let mut inst = instance("ns_common", params, ns_common(p.a0, p.angle, &theta), b);
    inst.constraints.div_free = true;
    inst.constraints.v_zero = is_zero(&theta);
    let (a1, a2) = (p.angle.cos(), p.angle.sin());
    inst.invariance = Some(Invariance::new("<a1 P^x + a2 P^y>", &[&[(Generator::Px, a1), (Generator::Py, a2)]]));
    Ok(inst)
}

fn defaults_ns_common() -> Vec<Value> {
    let w3 = HeatSolution1D::constant(1.0).with(0.5, HeatAtom::Trig { lambda: 2.0, phase: 0.1 });
    vec![
        json!({"a0": 0.0, "angle": FRAC_PI_2, "w": HeatSolution1D::cosh_mode(1.0).to_json()}),
        json!({"a0": 1.0, "angle": FRAC_PI_4, "w": HeatSolution1D::cosh_mode(1.0).to_json()}),
        json!({"a0": -0.5, "angle": 1.0, "w": w3.to_json()}),
    ]
}

// ---------------------------------------------------------------------------
// Potential reduction

/// `φ_ω` as a univariate second-order jet in `ω`.
pub fn potential_phi_omega(varsigma: f64, c1: f64, c2: f64, omega: f64) -> Result<Jet> {
    let s = varsigma;
    let w = Jet::var(0, omega);
    if s == 0.0 {
        // the prefactor 2ς/ω vanishes; for C2 = 0 the quotient is even 0/0
        return Ok(Jet::constant(0.0));
    }
    let zeta = w.atan();
    let (num, den, pre) = if s.abs() == 1.0 {
        let num = (zeta - s) * c2 + c1;
        let den = (w - s) * c1 + ((w - s) * zeta + 1.0) * c2;
        (num, den, 2.0)
    } else if s.abs() > 1.0 {
        let r = (s * s - 1.0).sqrt();
        let (n1, n2) = (s + r, s - r);
        let (e1, e2) = ((zeta * -n1).exp(), (zeta * -n2).exp());
        (e1 * (c1 * n1) + e2 * (c2 * n2), e1 * (w - n1) * c1 + e2 * (w - n2) * c2, 2.0 * s)
    } else {
        let m = (1.0 - s * s).sqrt();
        let (cs, sn) = ((zeta * m).cos(), (zeta * m).sin());
        let num = (cs * s + sn * m) * c1 + (sn * s - cs * m) * c2;
        let den = ((w - s) * cs - sn * m) * c1 + ((w - s) * sn + cs * m) * c2;
        (num, den, 2.0 * s)
    };
    if omega == 0.0 || den.v.abs() < 1e-12 {
        return Err(Error::ZeroDenominator(format!("potential reduction: denominator vanishes at omega = {omega}")));
    }
    Ok(num / den / w * pre)
}

fn potential_validate(varsigma: f64, c1: f64, c2: f64) -> Result<()> {
    finite("potential_reduction", &[varsigma, c1, c2])?;
    let gap = (varsigma.abs() - 1.0).abs();
    if gap != 0.0 && gap < 1e-8 {
        return Err(Error::CaseBoundary(format!("|varsigma| = {} is within 1e-8 of 1", varsigma.abs())));
    }
    if c1 == 0.0 && c2 == 0.0 {
        return Err(Error::InvalidCase("(C1, C2) = (0, 0)".into()));
    }
    Ok(())
}

/// `u = −(x/y²)φ_ω`, `v = φ_ω/y + 2ς/x`, `ω = x/y`.
pub fn potential_reduction(varsigma: f64, c1: f64, c2: f64) -> Result<FieldHandle> {
    potential_validate(varsigma, c1, c2)?;
    Ok(FnField::new(move |p| {
        if p.x == 0.0 || p.y == 0.0 {
            return Err(p.singular_error());
        }
        let [_, x, y] = Jet::vars(p.t, p.x, p.y);
        let omega = x / y;
        let (f0, f1, f2) = taylor(&potential_phi_omega(varsigma, c1, c2, omega.v)?);
        let phi_w = omega.chain(f0, f1, f2);
        let inv_y = y.recip();
        Ok([-(x * inv_y * inv_y * phi_w), phi_w * inv_y + x.recip() * (2.0 * varsigma)])
    })
    .with_singular(move |p| p.x == 0.0 || p.y == 0.0 || potential_phi_omega(varsigma, c1, c2, p.x / p.y).is_err())
    .handle())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialParams {
    varsigma: f64,
    c1: f64,
    c2: f64,
}

fn build_potential_reduction(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: PotentialParams = parse("potential_reduction", params)?;
    let field = potential_reduction(p.varsigma, p.c1, p.c2)?;
    if b.x.0 <= 0.0 && b.x.1 >= 0.0 || b.y.0 <= 0.0 && b.y.1 >= 0.0 {
        return Err(Error::ZeroDenominator("potential_reduction: test box meets x = 0 or y = 0".into()));
    }
    let corners = [b.x.0 / b.y.0, b.x.0 / b.y.1, b.x.1 / b.y.0, b.x.1 / b.y.1];
    let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sign = 0.0;
    for k in 0..=400 {
        let w = lo + (hi - lo) * k as f64 / 400.0;
        let d = potential_denominator(p.varsigma, p.c1, p.c2, w);
        if d.abs() < 1e-12 || (sign != 0.0 && d.signum() != sign) {
            return Err(Error::ZeroDenominator(format!("potential_reduction: denominator changes sign near omega = {w}")));
        }
        sign = d.signum();
    }
    let mut inst = instance("potential_reduction", params, field, b);
    inst.constraints.ux_eq_vy = true;
    inst.invariance = Some(Invariance::new("<P^t, D>", &[&[(Generator::Pt, 1.0)], &[(Generator::D, 1.0)]]));
    Ok(inst)
}

fn potential_denominator(s: f64, c1: f64, c2: f64, w: f64) -> f64 {
    let zeta = w.atan();
    if s == 0.0 {
        1.0
    } else if s.abs() == 1.0 {
        (w - s) * c1 + ((w - s) * zeta + 1.0) * c2
    } else if s.abs() > 1.0 {
        let r = (s * s - 1.0).sqrt();
        let (n1, n2) = (s + r, s - r);
        (-n1 * zeta).exp() * (w - n1) * c1 + (-n2 * zeta).exp() * (w - n2) * c2
    } else {
        let m = (1.0 - s * s).sqrt();
        ((w - s) * (m * zeta).cos() - m * (m * zeta).sin()) * c1 + ((w - s) * (m * zeta).sin() + m * (m * zeta).cos()) * c2
    }
}

fn defaults_potential_reduction() -> Vec<Value> {
    vec![
        json!({"varsigma": 1.0, "c1": 1.0, "c2": 0.0}),
        json!({"varsigma": 1.25, "c1": 1.0, "c2": 0.0}),
        json!({"varsigma": 0.5, "c1": 1.0, "c2": 0.3}),
    ]
}

// ---------------------------------------------------------------------------
// Complex Hamilton–Jacobi family

fn hj_solve(coeffs: &[Complex64], branch: Branch, p: &Point) -> Result<[Jet; 2]> {
    let problem = ComplexRootProblem::new(coeffs.to_vec(), p.t, Complex64::new(p.x, p.y))?;
    let a = hj_branch_root(&problem, branch)?;
    hj_field_jet(&problem, a)
}

/// `u = −Im a`, `v = Re a` with `a` the root of `z − iat + F'(a) = 0` on the named branch.
pub fn hj_family(coeffs: Vec<Complex64>, branch: Branch) -> Result<FieldHandle> {
    ComplexRootProblem::new(coeffs.clone(), 0.0, Complex64::new(0.0, 0.0))?;
    let guard = coeffs.clone();
    Ok(FnField::new(move |p| hj_solve(&coeffs, branch, p))
        .with_singular(move |p| matches!(hj_solve(&guard, branch, p), Err(Error::JacobianSingular(_))))
        .handle())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HjParams {
    f: Vec<Coefficient>,
    #[serde(default = "default_branch")]
    branch: Branch,
}

fn default_branch() -> Branch {
    Branch::Plus
}

fn build_hj(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: HjParams = parse("hj_family", params)?;
    let coeffs: Vec<Complex64> = p
        .f
        .iter()
        .map(|c| match *c {
            Coefficient::Real(r) => Complex64::new(r, 0.0),
            Coefficient::Complex([re, im]) => Complex64::new(re, im),
        })
        .collect();
    let mut inst = instance("hj_family", params, hj_family(coeffs, p.branch)?, b);
    inst.constraints.ux_eq_vy = true;
    Ok(inst)
}

fn defaults_hj() -> Vec<Value> {
    vec![
        json!({"f": [0.0, 0.0, -0.5]}),
        json!({"f": [0.0, 0.0, 0.0, 1.0 / 3.0], "branch": "plus"}),
        json!({"f": [0.1, [0.0, 0.3], 0.2, 1.0 / 3.0, 0.0, [0.05, 0.02]], "branch": "minus"}),
    ]
}

// ---------------------------------------------------------------------------
// Weierstrass and Lamé family

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeierstrassParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Data `φ(z0) = phi0`, `φ'(z0) = dphi0` in the variable `s = y/√6 + C2`; defaults to
    /// the middle of the range.
    #[serde(default)]
    pub z0: Option<f64>,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default)]
    pub dphi0: f64,
}

impl WeierstrassParams {
    pub fn has_lame_part(&self) -> bool {
        self.phi0 != 0.0 || self.dphi0 != 0.0
    }
}

fn s_of_y(y: f64, c2: f64) -> f64 {
    y / SQRT6 + c2
}

/// Pole-free interval of ℘(·; 0, g3) containing `[lo, hi]`, widened by up to `pad`.
fn pole_free_cell(lo: f64, hi: f64, g3: f64, pad: f64) -> Result<(f64, f64)> {
    if let Some(p) = pole_in(lo, hi, g3) {
        return Err(Error::PoleInRange(p));
    }
    let period = real_period(g3);
    let margin = 0.05;
    let (cell_lo, cell_hi) = if period.is_infinite() {
        if lo > 0.0 {
            (0.0, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, 0.0)
        }
    } else {
        let k = (lo / period).floor();
        (k * period, (k + 1.0) * period)
    };
    Ok(((lo - pad).max(cell_lo + margin).min(lo), (hi + pad).min(cell_hi - margin).max(hi)))
}

/// `u = ℘(s; 0, C1)·x + e^(C3 t)φ(s)`, `v = 0`, with `s = y/√6 + C2` and `φ'' = 6(C3 + ℘)φ`.
/// `y_range` fixes the interval on which the Lamé equation is integrated.
pub fn weierstrass(params: WeierstrassParams, y_range: (f64, f64)) -> Result<FieldHandle> {
    let WeierstrassParams { c1, c2, c3, z0, phi0, dphi0 } = params;
    finite("weierstrass", &[c1, c2, c3, phi0, dphi0, z0.unwrap_or(0.0)])?;
    let (s_lo, s_hi) = (s_of_y(y_range.0, c2), s_of_y(y_range.1, c2));
    let lame: Option<Arc<LameSolution>> = if params.has_lame_part() {
        let z0 = z0.unwrap_or(0.5 * (s_lo + s_hi));
        let (a, b) = pole_free_cell(s_lo.min(z0), s_hi.max(z0), c1, 0.5)?;
        Some(Arc::new(lame_solve(c1, c3, (a, b), z0, (phi0, dphi0))?))
    } else {
        pole_free_cell(s_lo, s_hi, c1, 0.0)?;
        None
    };
    let guard = lame.clone();
    Ok(FnField::new(move |p| {
        let [t, x, y] = Jet::vars(p.t, p.x, p.y);
        let s = y / SQRT6 + c2;
        let w = wp_derivatives(s.v, c1)?;
        let mut u = s.chain(w[0], w[1], w[2]) * x;
        if let Some(l) = &lame {
            let f = l.eval(s.v)?;
            u += (t * c3).exp() * s.chain(f[0], f[1], f[2]);
        }
        Ok([u, Jet::constant(0.0)])
    })
    .with_singular(move |p| {
        let s = s_of_y(p.y, c2);
        crate::special::wp::pole_distance(s, c1) < 1e-6
            || guard.as_ref().is_some_and(|l| !(l.range.0..=l.range.1).contains(&s))
    })
    .handle())
}

fn build_weierstrass(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: WeierstrassParams = parse("weierstrass", params)?;
    let mut inst = instance("weierstrass", params, weierstrass(p, b.y)?, b);
    inst.constraints.v_zero = true;
    inst.tolerance = if p.has_lame_part() { TOL_LAME } else { TOL_WP };
    if !p.has_lame_part() || p.c3 == 0.0 {
        inst.invariance = Some(Invariance::new("<P^t>", &[&[(Generator::Pt, 1.0)]]));
    }
    Ok(inst)
}

fn defaults_weierstrass() -> Vec<Value> {
    vec![
        json!({"c1": 0.0, "c2": 0.0, "c3": 0.0}),
        json!({"c1": 0.0, "c2": 0.0, "c3": 0.0, "z0": 0.5, "phi0": 0.125, "dphi0": 0.75}),
        json!({"c1": 1.0, "c2": 0.0, "c3": 0.5, "z0": 0.5, "phi0": 1.0, "dphi0": 0.0}),
    ]
}

// ---------------------------------------------------------------------------
// Darboux family

/// `u = 6x/y² + θ_yy − 3θ_y/y + 3θ/y²`, `v = 0` with `θ(t, y)` a heat solution.
pub fn darboux(theta: &HeatSolution1D) -> FieldHandle {
    let (theta, guard) = (theta.clone(), theta.clone());
    FnField::new(move |p| {
        let [_, x, y] = Jet::vars(p.t, p.x, p.y);
        let extra = darboux_jet3(&theta, p.t, p.y)?.to_jet();
        Ok([x * 6.0 / (y * y) + extra, Jet::constant(0.0)])
    })
    .with_singular(move |p| p.y == 0.0 || guard.is_singular(p.t))
    .handle()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DarbouxParams {
    theta: Value,
}

fn build_darboux(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: DarbouxParams = parse("darboux", params)?;
    let theta = HeatSolution1D::from_json(&p.theta)?;
    if b.y.0 <= 0.0 && b.y.1 >= 0.0 {
        return Err(Error::ZeroDenominator("darboux: test box meets y = 0".into()));
    }
    let mut inst = instance("darboux", params, darboux(&theta), b);
    inst.constraints.v_zero = true;
    Ok(inst)
}

fn defaults_darboux() -> Vec<Value> {
    vec![
        json!({"theta": HeatSolution1D::zero().to_json()}),
        json!({"theta": HeatSolution1D::heat_polynomial(2).unwrap().to_json()}),
        json!({"theta": HeatSolution1D::cosh_mode(0.5).to_json()}),
    ]
}

// ---------------------------------------------------------------------------
// Heun family

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeunFamily {
    pub branch: Branch,
    pub nu: f64,
    pub c1: f64,
    pub c2: f64,
}

impl HeunFamily {
    fn lambda(&self) -> f64 {
        3.0 + self.branch.sign() * SQRT6
    }

    /// Parameters of the Heun function multiplying `C1·y` (`beta_half = 0.5`) or
    /// `C2·|t|^(1/2)` (`beta_half = −0.5`).
    pub fn heun_params(&self, beta_half: f64) -> HeunParams {
        let (lam, nu, sg) = (self.lambda(), self.nu, self.branch.sign());
        HeunParams::new(
            2.5 * lam,
            beta_half,
            -5.0,
            5.0 * lam * (4.0 * nu + 1.0) / 8.0,
            -2.5 * lam * nu - 59.0 / 8.0 - sg * 29.0 * SQRT6 / 8.0,
        )
    }

    /// Coefficient `w1(t, y)` of `x`.
    pub fn w1(&self, t: Jet, y: Jet) -> Jet {
        let sg = self.branch.sign();
        let den = y * y + t * (10.0 * self.lambda());
        (y * y + t * (18.0 + sg * 8.0 * SQRT6)) * (12.0 * (4.0 + sg * SQRT6)) / (den * den)
    }

    pub fn jets(&self, p: &Point) -> Result<[Jet; 2]> {
        let [t, x, y] = Jet::vars(p.t, p.x, p.y);
        let lam = self.lambda();
        let den = y * y + t * (10.0 * lam);
        if p.t == 0.0 || den.v.abs() < 1e-12 {
            return Err(p.singular_error());
        }
        let mut u = self.w1(t, y) * x;
        if self.c1 != 0.0 || self.c2 != 0.0 {
            let at = t.abs();
            let z = -(y * y) / (t * (10.0 * lam));
            let pre = at.powf(self.nu + 1.5) * (-(y * y) / (t * 4.0)).exp() / (den * den);
            let mut inner = Jet::constant(0.0);
            if self.c1 != 0.0 {
                let h = self.heun_params(0.5).eval(z.v)?;
                inner += y * z.chain(h[0], h[1], h[2]) * self.c1;
            }
            if self.c2 != 0.0 {
                let h = self.heun_params(-0.5).eval(z.v)?;
                inner += at.sqrt() * z.chain(h[0], h[1], h[2]) * self.c2;
            }
            u += pre * inner;
        }
        Ok([u, Jet::constant(0.0)])
    }
}

pub fn heun_family(params: HeunFamily) -> Result<FieldHandle> {
    finite("heun", &[params.nu, params.c1, params.c2])?;
    let lam = params.lambda();
    Ok(FnField::new(move |p| params.jets(p))
        .with_singular(move |p| p.t == 0.0 || (p.y * p.y + 10.0 * lam * p.t).abs() < 1e-12)
        .handle())
}

fn build_heun(params: &Value, b: &TestBox) -> Result<FamilyInstance> {
    let p: HeunFamily = parse("heun", params)?;
    if b.t.0 <= 0.0 && b.t.1 >= 0.0 {
        return Err(Error::SingularTime(0.0));
    }
    let mut inst = instance("heun", params, heun_family(p)?, b);
    inst.constraints.v_zero = true;
    inst.tolerance = if p.c1 == 0.0 && p.c2 == 0.0 { TOL_ALGEBRAIC } else { TOL_HEUN };
    Ok(inst)
}

fn defaults_heun() -> Vec<Value> {
    vec![
        json!({"branch": "plus", "nu": 0.0, "c1": 0.0, "c2": 0.0}),
        json!({"branch": "plus", "nu": 0.0, "c1": 1.0, "c2": 0.0}),
        json!({"branch": "minus", "nu": 0.5, "c1": 0.0, "c2": 1.0}),
    ]
}
