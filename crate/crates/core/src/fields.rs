//! Velocity fields on `(t, x, y)`, derivative access, sampling grids and CSV export.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{hidx, Jet};

/// A point of space-time. Coordinates are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(t: f64, x: f64, y: f64) -> Result<Point> {
        if t.is_finite() && x.is_finite() && y.is_finite() {
            Ok(Point { t, x, y })
        } else {
            Err(Error::NonFinitePoint(t, x, y))
        }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.t, self.x, self.y]
    }

    pub fn from_coords(c: [f64; 3]) -> Result<Point> {
        Point::new(c[0], c[1], c[2])
    }

    fn shifted(&self, d: [f64; 3]) -> Point {
        Point { t: self.t + d[0], x: self.x + d[1], y: self.y + d[2] }
    }

    pub(crate) fn singular_error(&self) -> Error {
        Error::SingularPoint(self.t, self.x, self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.t, self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    U,
    V,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::U => 0,
            Component::V => 1,
        }
    }
}

/// Orders of differentiation in `(t, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MultiIndex {
    pub t: u8,
    pub x: u8,
    pub y: u8,
}

impl MultiIndex {
    pub const VALUE: MultiIndex = MultiIndex { t: 0, x: 0, y: 0 };
    pub const T: MultiIndex = MultiIndex { t: 1, x: 0, y: 0 };
    pub const X: MultiIndex = MultiIndex { t: 0, x: 1, y: 0 };
    pub const Y: MultiIndex = MultiIndex { t: 0, x: 0, y: 1 };
    pub const XX: MultiIndex = MultiIndex { t: 0, x: 2, y: 0 };
    pub const XY: MultiIndex = MultiIndex { t: 0, x: 1, y: 1 };
    pub const YY: MultiIndex = MultiIndex { t: 0, x: 0, y: 2 };
    pub const TT: MultiIndex = MultiIndex { t: 2, x: 0, y: 0 };
    pub const TX: MultiIndex = MultiIndex { t: 1, x: 1, y: 0 };
    pub const TY: MultiIndex = MultiIndex { t: 1, x: 0, y: 1 };

    pub fn new(t: u8, x: u8, y: u8) -> MultiIndex {
        MultiIndex { t, x, y }
    }

    pub fn order(&self) -> usize {
        (self.t + self.x + self.y) as usize
    }

    /// Variable slots (0 = t, 1 = x, 2 = y), repeated by multiplicity.
    fn slots(&self) -> Vec<usize> {
        let mut s = Vec::new();
        s.extend(std::iter::repeat(0).take(self.t as usize));
        s.extend(std::iter::repeat(1).take(self.x as usize));
        s.extend(std::iter::repeat(2).take(self.y as usize));
        s
    }

    /// All multi-indices of order at most two.
    pub fn all() -> [MultiIndex; 10] {
        [
            Self::VALUE,
            Self::T,
            Self::X,
            Self::Y,
            Self::TT,
            Self::TX,
            Self::TY,
            Self::XX,
            Self::XY,
            Self::YY,
        ]
    }
}

/// Read the entry of a jet selected by a multi-index of order <= 2.
pub fn jet_entry(j: &Jet, mi: MultiIndex) -> Result<f64> {
    let s = mi.slots();
    match s.len() {
        0 => Ok(j.v),
        1 => Ok(j.g[s[0]]),
        2 => Ok(j.h[hidx(s[0], s[1])]),
        n => Err(Error::OrderTooHigh(n)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// The jets of `u` and `v` at a point.
pub type FieldJet = [Jet; 2];

/// A velocity field `(u, v)` on `(t, x, y)` with derivatives up to second order.
///
/// Implementations are immutable; every method is a pure function of its inputs.
pub trait SpaceTimeField: Send + Sync {
    /// Value, gradient and Hessian of both components. Callers should use [`SpaceTimeField::local`],
    /// which screens the singular set first.
    fn jet(&self, p: &Point) -> Result<FieldJet>;

    /// Points where the field is undefined.
    fn is_singular(&self, _p: &Point) -> bool {
        false
    }

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }

    /// Cheap value-only evaluation; defaults to the jet.
    fn value(&self, p: &Point) -> Result<(f64, f64)> {
        let j = self.jet(p)?;
        Ok((j[0].v, j[1].v))
    }

    fn local(&self, p: &Point) -> Result<FieldJet> {
        if self.is_singular(p) {
            return Err(p.singular_error());
        }
        self.jet(p)
    }

    fn eval(&self, p: &Point) -> Result<(f64, f64)> {
        if self.is_singular(p) {
            return Err(p.singular_error());
        }
        self.value(p)
    }

    fn deriv(&self, p: &Point, c: Component, mi: MultiIndex) -> Result<f64> {
        if mi.order() > 2 {
            return Err(Error::OrderTooHigh(mi.order()));
        }
        let j = self.local(p)?;
        jet_entry(&j[c.index()], mi)
    }
}

pub type FieldHandle = Arc<dyn SpaceTimeField>;

type JetFn = dyn Fn(&Point) -> Result<FieldJet> + Send + Sync;
type SingularFn = dyn Fn(&Point) -> bool + Send + Sync;

/// A field defined by closures.
pub struct FnField {
    jet: Box<JetFn>,
    singular: Box<SingularFn>,
}

impl FnField {
    pub fn new(jet: impl Fn(&Point) -> Result<FieldJet> + Send + Sync + 'static) -> FnField {
        FnField { jet: Box::new(jet), singular: Box::new(|_| false) }
    }

    pub fn with_singular(mut self, s: impl Fn(&Point) -> bool + Send + Sync + 'static) -> FnField {
        self.singular = Box::new(s);
        self
    }

    /// Field from a closure mapping coordinate jets `(t, x, y)` to `(u, v)` jets.
    pub fn from_expr(f: impl Fn([Jet; 3]) -> Result<FieldJet> + Send + Sync + 'static) -> FnField {
        FnField::new(move |p| f(Jet::vars(p.t, p.x, p.y)))
    }

    pub fn handle(self) -> FieldHandle {
        Arc::new(self)
    }
}

impl SpaceTimeField for FnField {
    fn jet(&self, p: &Point) -> Result<FieldJet> {
        (self.jet)(p)
    }
    fn is_singular(&self, p: &Point) -> bool {
        (self.singular)(p)
    }
}

/// Swap `(x, u)` with `(y, v)`.
pub struct Permuted(pub FieldHandle);

/// Jet of a scalar after exchanging the roles of `x` and `y`.
pub fn swap_jet(j: &Jet) -> Jet {
    Jet {
        v: j.v,
        g: [j.g[0], j.g[2], j.g[1]],
        h: [j.h[0], j.h[2], j.h[1], j.h[5], j.h[4], j.h[3]],
    }
}

impl SpaceTimeField for Permuted {
    fn jet(&self, p: &Point) -> Result<FieldJet> {
        let q = Point { t: p.t, x: p.y, y: p.x };
        let j = self.0.local(&q)?;
        Ok([swap_jet(&j[1]), swap_jet(&j[0])])
    }
    fn is_singular(&self, p: &Point) -> bool {
        self.0.is_singular(&Point { t: p.t, x: p.y, y: p.x })
    }
    fn derivative_mode(&self) -> DerivativeMode {
        self.0.derivative_mode()
    }
}

/// Default finite-difference step for a coordinate.
pub fn default_step(coord: f64) -> f64 {
    1e-4 * coord.abs().max(1.0)
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// Fourth-order central finite-difference derivative of a field component.
pub fn fd_derivative(field: &dyn SpaceTimeField, p: &Point, c: Component, mi: MultiIndex, h: f64) -> Result<f64> {
    if mi.order() > 2 {
        return Err(Error::OrderTooHigh(mi.order()));
    }
    let scale = p.coords().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let min = 64.0 * f64::EPSILON * scale;
    if !(h >= min) {
        return Err(Error::StepTooSmall { h, min });
    }
    let at = |d: [f64; 3]| -> Result<f64> {
        let q = p.shifted(d);
        if field.is_singular(&q) {
            return Err(Error::StencilHitsSingularity);
        }
        let (u, v) = field.value(&q)?;
        Ok(if c == Component::U { u } else { v })
    };
    let unit = |i: usize, s: f64| {
        let mut d = [0.0; 3];
        d[i] = s;
        d
    };
    let slots = mi.slots();
    match slots.as_slice() {
        [] => at([0.0; 3]),
        [i] => {
            let mut s = 0.0;
            for (k, w) in D1.iter().enumerate() {
                if *w != 0.0 {
                    s += w * at(unit(*i, (k as f64 - 2.0) * h))?;
                }
            }
            Ok(s / h)
        }
        [i, j] if i == j => {
            let mut s = 0.0;
            for (k, w) in D2.iter().enumerate() {
                s += w * at(unit(*i, (k as f64 - 2.0) * h))?;
            }
            Ok(s / (h * h))
        }
        [i, j] => {
            let mut s = 0.0;
            for (a, wa) in D1.iter().enumerate() {
                for (b, wb) in D1.iter().enumerate() {
                    if *wa == 0.0 || *wb == 0.0 {
                        continue;
                    }
                    let mut d = unit(*i, (a as f64 - 2.0) * h);
                    d[*j] = (b as f64 - 2.0) * h;
                    s += wa * wb * at(d)?;
                }
            }
            Ok(s / (h * h))
        }
        _ => unreachable!(),
    }
}

/// Observed convergence order of a finite-difference derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum ConvergenceOrder {
    /// Differences vanish to rounding level at every step size.
    Exact,
    Observed(f64),
}

impl ConvergenceOrder {
    pub fn at_least(&self, p: f64) -> bool {
        match self {
            ConvergenceOrder::Exact => true,
            ConvergenceOrder::Observed(q) => *q >= p,
        }
    }
}

impl fmt::Display for ConvergenceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvergenceOrder::Exact => write!(f, "exact"),
            ConvergenceOrder::Observed(p) => write!(f, "{p:.3}"),
        }
    }
}

/// Noise floor relative to the magnitude of the quantity.
fn noise_floor(scale: f64) -> f64 {
    1e-11 * scale.max(1.0)
}

/// Order estimated from the three approximations at `h0`, `h0/2`, `h0/4` alone.
pub fn richardson_order(field: &dyn SpaceTimeField, p: &Point, c: Component, mi: MultiIndex, h0: f64) -> Result<ConvergenceOrder> {
    let d0 = fd_derivative(field, p, c, mi, h0)?;
    let d1 = fd_derivative(field, p, c, mi, h0 / 2.0)?;
    let d2 = fd_derivative(field, p, c, mi, h0 / 4.0)?;
    let e1 = (d0 - d1).abs();
    let e2 = (d1 - d2).abs();
    let floor = noise_floor(d2.abs());
    if e1 <= floor && e2 <= floor {
        return Ok(ConvergenceOrder::Exact);
    }
    Ok(ConvergenceOrder::Observed((e1 / e2.max(f64::MIN_POSITIVE)).log2()))
}

/// Order estimated from errors against a reference value (for example an analytic derivative).
pub fn richardson_order_against(
    field: &dyn SpaceTimeField,
    p: &Point,
    c: Component,
    mi: MultiIndex,
    h0: f64,
    reference: f64,
) -> Result<ConvergenceOrder> {
    let errs: Vec<f64> = [h0, h0 / 2.0, h0 / 4.0]
        .iter()
        .map(|h| fd_derivative(field, p, c, mi, *h).map(|d| (d - reference).abs()))
        .collect::<Result<_>>()?;
    let floor = noise_floor(reference.abs());
    if errs.iter().all(|e| *e <= floor) {
        return Ok(ConvergenceOrder::Exact);
    }
    let o1 = (errs[0] / errs[1].max(f64::MIN_POSITIVE)).log2();
    let o2 = (errs[1] / errs[2].max(f64::MIN_POSITIVE)).log2();
    Ok(ConvergenceOrder::Observed(o1.min(o2)))
}

/// Wraps a field and replaces its derivatives by fourth-order finite differences of its values.
pub struct FdField {
    inner: FieldHandle,
}

impl FdField {
    pub fn new(inner: FieldHandle) -> FdField {
        FdField { inner }
    }
}

impl SpaceTimeField for FdField {
    fn jet(&self, p: &Point) -> Result<FieldJet> {
        let h = p.coords().iter().fold(0.0f64, |m, c| m.max(default_step(*c)));
        let mut out = [Jet::ZERO; 2];
        for c in [Component::U, Component::V] {
            let j = &mut out[c.index()];
            let (u, v) = self.inner.value(p)?;
            j.v = if c == Component::U { u } else { v };
            for (i, mi) in [MultiIndex::T, MultiIndex::X, MultiIndex::Y].iter().enumerate() {
                j.g[i] = fd_derivative(self.inner.as_ref(), p, c, *mi, h)?;
            }
            for (k, mi) in [MultiIndex::TT, MultiIndex::TX, MultiIndex::TY, MultiIndex::XX, MultiIndex::XY, MultiIndex::YY]
                .iter()
                .enumerate()
            {
                j.h[k] = fd_derivative(self.inner.as_ref(), p, c, *mi, h)?;
            }
        }
        Ok(out)
    }
    fn value(&self, p: &Point) -> Result<(f64, f64)> {
        self.inner.value(p)
    }
    fn is_singular(&self, p: &Point) -> bool {
        self.inner.is_singular(p)
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::FiniteDifference
    }
}

/// A tensor-product sampling grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_values: Vec<f64>,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
}

fn check_axis(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::InvalidInput(format!("axis {name} needs at least 2 points")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(format!("axis {name} must be finite and strictly increasing")));
    }
    Ok(())
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl Grid {
    pub fn new(t_values: Vec<f64>, x_values: Vec<f64>, y_values: Vec<f64>) -> Result<Grid> {
        check_axis("t", &t_values)?;
        check_axis("x", &x_values)?;
        check_axis("y", &y_values)?;
        Ok(Grid { t_values, x_values, y_values })
    }

    pub fn uniform(t: (f64, f64, usize), x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Grid> {
        for n in [t.2, x.2, y.2] {
            if n < 2 {
                return Err(Error::InvalidInput("each axis needs at least 2 points".into()));
            }
        }
        Grid::new(linspace(t.0, t.1, t.2), linspace(x.0, x.1, x.2), linspace(y.0, y.1, y.2))
    }

    /// Parse `t0:t1:nt,x0:x1:nx,y0:y1:ny`.
    pub fn parse(spec: &str) -> Result<Grid> {
        let axes: Vec<&str> = spec.split(',').collect();
        if axes.len() != 3 {
            return Err(Error::InvalidInput(format!("grid spec needs three axes: {spec}")));
        }
        let mut parsed = Vec::new();
        for a in axes {
            let parts: Vec<&str> = a.trim().split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidInput(format!("axis spec must be lo:hi:n, got {a}")));
            }
            let lo: f64 = parts[0].parse().map_err(|_| Error::InvalidInput(format!("bad number {}", parts[0])))?;
            let hi: f64 = parts[1].parse().map_err(|_| Error::InvalidInput(format!("bad number {}", parts[1])))?;
            let n: usize = parts[2].parse().map_err(|_| Error::InvalidInput(format!("bad count {}", parts[2])))?;
            parsed.push((lo, hi, n));
        }
        Grid::uniform(parsed[0], parsed[1], parsed[2])
    }

    pub fn len(&self) -> usize {
        self.t_values.len() * self.x_values.len() * self.y_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points, t-major then x then y.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len());
        for &t in &self.t_values {
            for &x in &self.x_values {
                for &y in &self.y_values {
                    out.push(Point { t, x, y });
                }
            }
        }
        out
    }

    /// Points outside the singular set of `field`.
    pub fn active_points(&self, field: &dyn SpaceTimeField) -> Vec<Point> {
        self.points().into_iter().filter(|p| !field.is_singular(p)).collect()
    }
}

/// Burgers residuals `(R1, R2)` from the field jets.
pub fn burgers_residual_at(j: &FieldJet) -> (f64, f64) {
    let [u, v] = j;
    let r = |w: &Jet| w.g[0] + u.v * w.g[1] + v.v * w.g[2] - w.h[3] - w.h[5];
    (r(u), r(v))
}

/// Write field samples as CSV with header `t,x,y,u,v` and optionally `R1,R2`.
/// Masked points are skipped.
pub fn write_csv(field: &dyn SpaceTimeField, grid: &Grid, with_residuals: bool, out: &mut dyn Write) -> Result<usize> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
    if with_residuals {
        writeln!(out, "t,x,y,u,v,R1,R2").map_err(io)?;
    } else {
        writeln!(out, "t,x,y,u,v").map_err(io)?;
    }
    let mut rows = 0;
    for p in grid.active_points(field) {
        if with_residuals {
            let j = field.local(&p)?;
            let (r1, r2) = burgers_residual_at(&j);
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.t, p.x, p.y, j[0].v, j[1].v, r1, r2
            )
            .map_err(io)?;
        } else {
            let (u, v) = field.eval(&p)?;
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.t, p.x, p.y, u, v).map_err(io)?;
        }
        rows += 1;
    }
    Ok(rows)
}
