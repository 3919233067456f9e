//! The point symmetry group of the Burgers system in explicit parameterized form.
//!
//! An element acts by
//!
//! ```text
//! t' = (a t + b) / (c t + d)
//! x' = σ/(c t + d) O x + t' m + n
//! u' = (c t + d)/σ O u − c/σ O x + m,      σ = sqrt(a d − b c)
//! ```
//!
//! with `O = R(angle)·diag(1, ±1)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{burgers_residual_at, FieldHandle, FieldJet, Point, SpaceTimeField};
use crate::jet::Jet;
use crate::lie_algebra::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupElement {
    pub sl2: [f64; 4],
    pub angle: f64,
    pub reflect: bool,
    pub boost: [f64; 2],
    pub shift: [f64; 2],
}

impl Default for GroupElement {
    fn default() -> Self {
        GroupElement::identity()
    }
}

/// One-parameter subgroup generated by a basis element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowParam {
    pub generator: Generator,
    pub epsilon: f64,
}

fn rot(angle: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

impl GroupElement {
    pub fn identity() -> GroupElement {
        GroupElement { sl2: [1.0, 0.0, 0.0, 1.0], angle: 0.0, reflect: false, boost: [0.0; 2], shift: [0.0; 2] }
    }

    pub fn det(&self) -> f64 {
        let [a, b, c, d] = self.sl2;
        a * d - b * c
    }

    pub fn sigma(&self) -> f64 {
        self.det().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.sl2.iter().chain(&self.boost).chain(&self.shift).chain(std::iter::once(&self.angle)).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("group element has non-finite parameters".into()));
        }
        if !(self.det() > 0.0) {
            return Err(Error::ParameterOutOfDomain(format!("ad - bc = {} must be positive", self.det())));
        }
        Ok(())
    }

    /// Orthogonal part applied to a vector.
    pub fn orth(&self, v: [f64; 2]) -> [f64; 2] {
        let w = if self.reflect { [v[0], -v[1]] } else { v };
        rot(self.angle, w)
    }

    fn orth_jet(&self, v: [Jet; 2]) -> [Jet; 2] {
        let w = if self.reflect { [v[0], -v[1]] } else { v };
        let (s, c) = self.angle.sin_cos();
        [w[0] * c - w[1] * s, w[0] * s + w[1] * c]
    }

    /// The matrix of the orthogonal part.
    pub fn orth_matrix(&self) -> [[f64; 2]; 2] {
        let e1 = self.orth([1.0, 0.0]);
        let e2 = self.orth([0.0, 1.0]);
        [[e1[0], e2[0]], [e1[1], e2[1]]]
    }

    /// Canonical representative: `ad − bc = 1`, first nonzero of `(a, b, c, d)` positive,
    /// angle in `(−π, π]`. Negating `(a, b, c, d)` is compensated by a half-turn of `O`.
    pub fn normalized(&self) -> Result<GroupElement> {
        self.validate()?;
        let s = self.sigma();
        let mut g = *self;
        g.sl2 = self.sl2.map(|v| v / s);
        let first = g.sl2.iter().copied().find(|v| v.abs() > 1e-300).unwrap_or(1.0);
        if first < 0.0 {
            g.sl2 = g.sl2.map(|v| -v);
            g.angle += PI;
        }
        g.angle = wrap_angle(g.angle);
        Ok(g)
    }

    pub fn act_point(&self, p: &Point, uv: (f64, f64)) -> Result<(Point, (f64, f64))> {
        let [a, b, c, d] = self.sl2;
        let den = c * p.t + d;
        if den == 0.0 {
            return Err(Error::DenominatorVanishes(format!("c t + d = 0 at t = {}", p.t)));
        }
        let sigma = self.sigma();
        let tn = (a * p.t + b) / den;
        let ox = self.orth([p.x, p.y]);
        let ou = self.orth([uv.0, uv.1]);
        let xn = [
            sigma / den * ox[0] + tn * self.boost[0] + self.shift[0],
            sigma / den * ox[1] + tn * self.boost[1] + self.shift[1],
        ];
        let un = [
            den / sigma * ou[0] - c / sigma * ox[0] + self.boost[0],
            den / sigma * ou[1] - c / sigma * ox[1] + self.boost[1],
        ];
        Ok((Point::new(tn, xn[0], xn[1])?, (un[0], un[1])))
    }

    /// Space-time part of the action on coordinate jets.
    fn base_map_jet(&self, tj: Jet, xj: Jet, yj: Jet) -> [Jet; 3] {
        let [a, b, c, d] = self.sl2;
        let sigma = self.sigma();
        let den = tj * c + d;
        let tn = (tj * a + b) / den;
        let ox = self.orth_jet([xj, yj]);
        let f = den.recip() * sigma;
        [tn, f * ox[0] + tn * self.boost[0] + self.shift[0], f * ox[1] + tn * self.boost[1] + self.shift[1]]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        self.validate()?;
        other.validate()?;
        let [a1, b1, c1, d1] = self.sl2;
        let [a2, b2, c2, d2] = other.sl2;
        let sl2 = [a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2];
        let s1 = self.sigma();
        let det1 = self.det();
        let p = self.orth(other.boost).map(|v| v * s1);
        let q = self.orth(other.shift).map(|v| v * s1);
        let boost = [0, 1].map(|i| (d1 * p[i] - c1 * q[i]) / det1 + self.boost[i]);
        let shift = [0, 1].map(|i| (-b1 * p[i] + a1 * q[i]) / det1 + self.shift[i]);
        let sign = if self.reflect { -1.0 } else { 1.0 };
        let g = GroupElement {
            sl2,
            angle: self.angle + sign * other.angle,
            reflect: self.reflect ^ other.reflect,
            boost,
            shift,
        };
        if !g.sl2.iter().chain(&g.boost).chain(&g.shift).all(|v| v.is_finite()) {
            return Err(Error::DenominatorVanishes("composition left the parameter chart".into()));
        }
        g.normalized()
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        self.validate()?;
        let [a, b, c, d] = self.sl2;
        let h = GroupElement {
            sl2: [d, -b, -c, a],
            angle: if self.reflect { self.angle } else { -self.angle },
            reflect: self.reflect,
            boost: [0.0; 2],
            shift: [0.0; 2],
        }
        .normalized()?;
        // The boost and shift of h ∘ self are those of h plus a term depending on self alone.
        let rest = h.compose(&GroupElement { boost: self.boost, shift: self.shift, ..GroupElement::identity() })?;
        GroupElement { boost: rest.boost.map(|v| -v), shift: rest.shift.map(|v| -v), ..h }.normalized()
    }

    pub fn flow(f: FlowParam) -> GroupElement {
        let e = f.epsilon;
        let mut g = GroupElement::identity();
        match f.generator {
            Generator::Pt => g.sl2 = [1.0, e, 0.0, 1.0],
            Generator::D => g.sl2 = [e.exp(), 0.0, 0.0, (-e).exp()],
            Generator::Pi => g.sl2 = [1.0, 0.0, -e, 1.0],
            Generator::J => g.angle = e,
            Generator::Px => g.shift = [e, 0.0],
            Generator::Py => g.shift = [0.0, e],
            Generator::Gx => g.boost = [e, 0.0],
            Generator::Gy => g.boost = [0.0, e],
        }
        g
    }

    /// The discrete symmetry `(x, u) → (−x, −u)`.
    pub fn mirror() -> GroupElement {
        GroupElement { angle: PI, reflect: true, ..GroupElement::identity() }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<GroupElement> {
        let g: GroupElement = serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("group element: {e}")))?;
        g.validate()?;
        Ok(g)
    }

    /// Largest parameter difference between two elements after normalization.
    pub fn distance(&self, o: &GroupElement) -> Result<f64> {
        let a = self.normalized()?;
        let b = o.normalized()?;
        if a.reflect != b.reflect {
            return Ok(f64::INFINITY);
        }
        let mut m = wrap_angle(a.angle - b.angle).abs();
        for (x, y) in a.sl2.iter().chain(&a.boost).chain(&a.shift).zip(b.sl2.iter().chain(&b.boost).chain(&b.shift)) {
            m = m.max((x - y).abs());
        }
        Ok(m)
    }
}

/// The image of a field under a group element.
pub struct TransformedField {
    g: GroupElement,
    inv: GroupElement,
    inner: FieldHandle,
}

impl TransformedField {
    fn preimage(&self, p: &Point) -> Option<Point> {
        let [_, _, c, d] = self.inv.sl2;
        if (c * p.t + d).abs() < 1e-12 {
            return None;
        }
        let [t, x, y] = self.inv.base_map_jet(Jet::constant(p.t), Jet::constant(p.x), Jet::constant(p.y));
        let q = Point::new(t.v, x.v, y.v).ok()?;
        let [_, _, c2, d2] = self.g.sl2;
        if (c2 * q.t + d2).abs() < 1e-12 {
            return None;
        }
        Some(q)
    }
}

impl SpaceTimeField for TransformedField {
    fn jet(&self, p: &Point) -> Result<FieldJet> {
        let pre = self.preimage(p).ok_or_else(|| Error::DenominatorVanishes(format!("chart boundary at {p}")))?;
        let [tj, xj, yj] = Jet::vars(p.t, p.x, p.y);
        let inner_coords = self.inv.base_map_jet(tj, xj, yj);
        let fj = self.inner.local(&pre)?;
        let uj = Jet::compose(&fj[0], &inner_coords);
        let vj = Jet::compose(&fj[1], &inner_coords);
        let [_, _, c, d] = self.g.sl2;
        let sigma = self.g.sigma();
        let den = inner_coords[0] * c + d;
        let ou = self.g.orth_jet([uj, vj]);
        let ox = self.g.orth_jet([inner_coords[1], inner_coords[2]]);
        let f = den * (1.0 / sigma);
        let k = c / sigma;
        Ok([f * ou[0] - ox[0] * k + self.g.boost[0], f * ou[1] - ox[1] * k + self.g.boost[1]])
    }

    fn is_singular(&self, p: &Point) -> bool {
        match self.preimage(p) {
            None => true,
            Some(q) => self.inner.is_singular(&q),
        }
    }

    fn derivative_mode(&self) -> crate::fields::DerivativeMode {
        self.inner.derivative_mode()
    }
}

pub fn act_field(g: &GroupElement, field: FieldHandle) -> Result<FieldHandle> {
    let g = g.normalized()?;
    let inv = g.inverse()?;
    Ok(Arc::new(TransformedField { g, inv, inner: field }))
}

/// Random element with parameters in `[−2, 2]` (angle in `[−3, 3]`) and `ad − bc > 0.2`.
pub fn random_element<R: Rng>(rng: &mut R) -> GroupElement {
    loop {
        let sl2 = [0; 4].map(|_| rng.gen_range(-2.0..2.0));
        let g = GroupElement {
            sl2,
            angle: rng.gen_range(-3.0..3.0),
            reflect: rng.gen_bool(0.5),
            boost: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            shift: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        };
        if g.det() > 0.2 {
            return g;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservationReport {
    pub points: usize,
    /// Images that fall on the chart boundary `ct + d = 0` or in the singular set.
    pub masked: usize,
    pub max_residual: f64,
    /// Largest gap between the transformed field and the pointwise action on values.
    pub max_value_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Burgers residual of the image of `field` under `g`, sampled at the images of `points`.
pub fn preservation_check(g: &GroupElement, field: FieldHandle, points: &[Point], tolerance: f64) -> Result<PreservationReport> {
    let image = act_field(g, field.clone())?;
    let rows = points
        .par_iter()
        .map(|p| -> Result<Option<(f64, f64)>> {
            if field.is_singular(p) {
                return Ok(None);
            }
            let uv = field.eval(p)?;
            let (q, w) = match g.act_point(p, uv) {
                Ok(r) => r,
                Err(Error::DenominatorVanishes(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            if image.is_singular(&q) {
                return Ok(None);
            }
            let j = image.local(&q)?;
            let (r1, r2) = burgers_residual_at(&j);
            let gap = (j[0].v - w.0).abs().max((j[1].v - w.1).abs());
            Ok(Some((r1.abs().max(r2.abs()), gap)))
        })
        .collect::<Result<Vec<_>>>()?;
    let kept: Vec<(f64, f64)> = rows.iter().flatten().copied().collect();
    let nan_max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |m, a| if a.is_nan() || m.is_nan() { f64::NAN } else { m.max(a) });
    let max_residual = nan_max(&mut kept.iter().map(|r| r.0));
    let max_value_gap = nan_max(&mut kept.iter().map(|r| r.1));
    Ok(PreservationReport {
        points: kept.len(),
        masked: rows.len() - kept.len(),
        max_residual,
        max_value_gap,
        tolerance,
        pass: !kept.is_empty() && max_residual <= tolerance,
    })
}
