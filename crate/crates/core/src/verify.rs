//! Residual oracles: the viscous and inviscid Burgers systems, the Navier–Stokes check with
//! constant pressure, differential constraints, potential equations and the classifier of
//! common viscid/inviscid solutions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{burgers_residual_at, DerivativeMode, FieldJet, Grid, Point, SpaceTimeField};
use crate::jet::Jet;
use crate::reduce::adaptive_simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Burgers,
    Inviscid,
    /// Burgers plus incompressibility: `(u, v, p = const)` solves Navier–Stokes.
    Ns,
    /// Burgers and inviscid together.
    Both,
}

impl std::str::FromStr for System {
    type Err = Error;
    fn from_str(s: &str) -> Result<System> {
        match s {
            "burgers" => Ok(System::Burgers),
            "inviscid" => Ok(System::Inviscid),
            "ns" => Ok(System::Ns),
            "both" => Ok(System::Both),
            _ => Err(Error::InvalidInput(format!("unknown system {s}"))),
        }
    }
}

/// Max and mean absolute value of one quantity over the evaluated points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stat {
    pub name: &'static str,
    pub max: f64,
    pub mean: f64,
}

fn stats(names: &[&'static str], rows: &[Vec<f64>]) -> Vec<Stat> {
    names
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let (mut max, mut sum) = (0.0f64, 0.0);
            for r in rows {
                let a = r[k].abs();
                // NaN must not vanish into max()
                max = if a.is_nan() || max.is_nan() { f64::NAN } else { max.max(a) };
                sum += a;
            }
            let mean = if rows.is_empty() { 0.0 } else { sum / rows.len() as f64 };
            Stat { name, max, mean }
        })
        .collect()
}

pub const CONSTRAINT_NAMES: [&str; 5] = ["u_y-v_x", "u_x-v_y", "u_x+v_y", "v", "u_xx"];

/// `u_y − v_x`, `u_x − v_y`, `u_x + v_y`, `v`, `u_xx` at a point.
pub fn constraint_values_at(j: &FieldJet) -> [f64; 5] {
    let [u, v] = j;
    [u.g[2] - v.g[1], u.g[1] - v.g[2], u.g[1] + v.g[2], v.v, u.h[3]]
}

/// `(u_t + uu_x + vu_y, v_t + uv_x + vv_y)`.
pub fn inviscid_residual_at(j: &FieldJet) -> (f64, f64) {
    let [u, v] = j;
    let r = |w: &Jet| w.g[0] + u.v * w.g[1] + v.v * w.g[2];
    (r(u), r(v))
}

fn system_rows(system: System, j: &FieldJet) -> Vec<f64> {
    let (r1, r2) = burgers_residual_at(j);
    match system {
        System::Burgers => vec![r1, r2],
        System::Inviscid => {
            let (i1, i2) = inviscid_residual_at(j);
            vec![i1, i2]
        }
        System::Ns => vec![r1, r2, j[0].g[1] + j[1].g[2]],
        System::Both => {
            let (i1, i2) = inviscid_residual_at(j);
            vec![r1, r2, i1, i2]
        }
    }
}

fn system_names(system: System) -> &'static [&'static str] {
    match system {
        System::Burgers => &["R1", "R2"],
        System::Inviscid => &["I1", "I2"],
        System::Ns => &["R1", "R2", "R3"],
        System::Both => &["R1", "R2", "I1", "I2"],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub system: System,
    pub mode: DerivativeMode,
    pub points: usize,
    /// Grid points skipped because they lie in the singular set.
    pub masked: usize,
    pub equations: Vec<Stat>,
    pub constraints: Vec<Stat>,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.equations.iter().fold(0.0f64, |m, s| if s.max.is_nan() || m.is_nan() { f64::NAN } else { m.max(s.max) })
    }

    pub fn equation(&self, name: &str) -> Option<&Stat> {
        self.equations.iter().find(|s| s.name == name)
    }

    pub fn constraint(&self, name: &str) -> Option<&Stat> {
        self.constraints.iter().find(|s| s.name == name)
    }
}

/// Jets at the regular grid points, in grid order, and the number of masked points.
pub fn grid_jets(field: &dyn SpaceTimeField, grid: &Grid) -> Result<(Vec<(Point, FieldJet)>, usize)> {
    let pts = grid.active_points(field);
    let masked = grid.len() - pts.len();
    let jets = pts.par_iter().map(|p| field.local(p).map(|j| (*p, j))).collect::<Result<Vec<_>>>()?;
    Ok((jets, masked))
}

/// Residuals of `system` and the constraint values over the regular points of `grid`;
/// the verdict compares the max norm with `tolerance`.
pub fn residual_report(field: &dyn SpaceTimeField, grid: &Grid, system: System, tolerance: f64) -> Result<ResidualReport> {
    let (jets, masked) = grid_jets(field, grid)?;
    let rows: Vec<Vec<f64>> = jets.iter().map(|(_, j)| system_rows(system, j)).collect();
    let crows: Vec<Vec<f64>> = jets.iter().map(|(_, j)| constraint_values_at(j).to_vec()).collect();
    let equations = stats(system_names(system), &rows);
    let mut report = ResidualReport {
        system,
        mode: field.derivative_mode(),
        points: jets.len(),
        masked,
        equations,
        constraints: stats(&CONSTRAINT_NAMES, &crows),
        tolerance,
        pass: false,
    };
    let m = report.max_residual();
    report.pass = !jets.is_empty() && m <= tolerance;
    Ok(report)
}

pub fn burgers_residual(field: &dyn SpaceTimeField, grid: &Grid, tolerance: f64) -> Result<ResidualReport> {
    residual_report(field, grid, System::Burgers, tolerance)
}

pub fn inviscid_residual(field: &dyn SpaceTimeField, grid: &Grid, tolerance: f64) -> Result<ResidualReport> {
    residual_report(field, grid, System::Inviscid, tolerance)
}

pub fn ns_prolongation_check(field: &dyn SpaceTimeField, grid: &Grid, tolerance: f64) -> Result<ResidualReport> {
    residual_report(field, grid, System::Ns, tolerance)
}

/// Max absolute values of the constraint expressions, keyed as in [`CONSTRAINT_NAMES`].
pub fn constraint_values(field: &dyn SpaceTimeField, grid: &Grid) -> Result<Vec<Stat>> {
    let (jets, _) = grid_jets(field, grid)?;
    let rows: Vec<Vec<f64>> = jets.iter().map(|(_, j)| constraint_values_at(j).to_vec()).collect();
    Ok(stats(&CONSTRAINT_NAMES, &rows))
}

/// Membership in the two subsets whose union is the set of common solutions of the
/// viscous and inviscid systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// `u`, `v` harmonic in `(x, y)` with `u_x = v_y`.
    pub subset_a: bool,
    /// All second space derivatives vanish.
    pub subset_b: bool,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match (self.subset_a, self.subset_b) {
            (true, true) => "intersection",
            (true, false) => "subset_a",
            (false, true) => "subset_b",
            (false, false) => "neither",
        }
    }
}

pub fn common_viscid_inviscid_classify(field: &dyn SpaceTimeField, grid: &Grid, tolerance: f64) -> Result<Classification> {
    let report = residual_report(field, grid, System::Both, tolerance)?;
    if !report.pass {
        let worst = report.equations.iter().map(|s| format!("{}={:.3e}", s.name, s.max)).collect::<Vec<_>>().join(", ");
        return Err(Error::NotACommonSolution(worst));
    }
    let (jets, _) = grid_jets(field, grid)?;
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for (_, [u, v]) in &jets {
        a = a.max((u.h[3] + u.h[5]).abs()).max((v.h[3] + v.h[5]).abs()).max((u.g[1] - v.g[2]).abs());
        for w in [u, v] {
            b = b.max(w.h[3].abs()).max(w.h[4].abs()).max(w.h[5].abs());
        }
    }
    Ok(Classification { subset_a: a <= tolerance, subset_b: b <= tolerance })
}

/// How a scalar potential encodes the velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialEquation {
    /// `u = ψ_x`, `v = ψ_y`: `ψ_t + ½ψ_x² + ½ψ_y² − ψ_xx − ψ_yy = 0`.
    Gradient,
    /// `u = ψ_y`, `v = ψ_x`: `ψ_t + ψ_xψ_y − ψ_xx − ψ_yy = 0`.
    Swapped,
    /// `ψ_t + ψ_xψ_y = 0` together with `ψ_xx + ψ_yy = 0`.
    HarmonicPair,
}

pub fn potential_residual_at(psi: &Jet, which: PotentialEquation) -> Vec<f64> {
    let lap = psi.h[3] + psi.h[5];
    let (pt, px, py) = (psi.g[0], psi.g[1], psi.g[2]);
    match which {
        PotentialEquation::Gradient => vec![pt + 0.5 * (px * px + py * py) - lap],
        PotentialEquation::Swapped => vec![pt + px * py - lap],
        PotentialEquation::HarmonicPair => vec![pt + px * py, lap],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialReport {
    pub equation: PotentialEquation,
    pub points: usize,
    pub residuals: Vec<Stat>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Residual of a potential equation for a scalar given by its jets.
pub fn potential_residuals(
    psi: &(dyn Fn(&Point) -> Result<Jet> + Sync),
    grid: &Grid,
    which: PotentialEquation,
    tolerance: f64,
) -> Result<PotentialReport> {
    let rows = grid.points().par_iter().map(|p| psi(p).map(|j| potential_residual_at(&j, which))).collect::<Result<Vec<_>>>()?;
    let names: &[&'static str] = match which {
        PotentialEquation::HarmonicPair => &["hj", "laplace"],
        _ => &["psi"],
    };
    let residuals = stats(names, &rows);
    let pass = !rows.is_empty() && residuals.iter().all(|s| s.max <= tolerance);
    Ok(PotentialReport { equation: which, points: rows.len(), residuals, tolerance, pass })
}

const LINE_TOL: f64 = 1e-13;

/// Potential of a field obtained by integrating along axis-parallel two-segment paths from an
/// anchor `(x0, y0)` at each fixed time. The gauge `ψ(t, x0, y0) = 0` leaves the equation
/// residual equal to a function of `t` alone, which is removed by subtracting its value at the
/// anchor.
pub struct LinePotential<'a> {
    pub field: &'a dyn SpaceTimeField,
    pub equation: PotentialEquation,
    pub anchor: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    XThenY,
    YThenX,
}

impl LinePotential<'_> {
    /// `(ψ_x, ψ_y)` as jets of the velocity components.
    fn gradient(&self, j: &FieldJet) -> (Jet, Jet) {
        match self.equation {
            PotentialEquation::Gradient => (j[0], j[1]),
            _ => (j[1], j[0]),
        }
    }

    fn integrand(&self, t: f64, x: f64, y: f64, along_x: bool, slot: usize) -> Result<f64> {
        let j = self.field.local(&Point::new(t, x, y)?)?;
        let (px, py) = self.gradient(&j);
        let w = if along_x { px } else { py };
        Ok(if slot == 0 { w.v } else { w.g[0] })
    }

    fn segment(&self, t: f64, fixed: f64, a: f64, b: f64, along_x: bool, slot: usize) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let err = std::cell::RefCell::new(None);
        let val = adaptive_simpson(
            &|s| {
                let (x, y) = if along_x { (s, fixed) } else { (fixed, s) };
                self.integrand(t, x, y, along_x, slot).unwrap_or_else(|e| {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                })
            },
            a,
            b,
            LINE_TOL,
        )?;
        match err.into_inner() {
            Some(e) => Err(Error::SingularPath(e.to_string())),
            None => Ok(val),
        }
    }

    /// `(ψ, ψ_t)` at `(t, x, y)` along `path`.
    pub fn value(&self, t: f64, x: f64, y: f64, path: Path) -> Result<(f64, f64)> {
        let (x0, y0) = self.anchor;
        let mut out = [0.0; 2];
        for (slot, o) in out.iter_mut().enumerate() {
            *o = match path {
                Path::XThenY => self.segment(t, y0, x0, x, true, slot)? + self.segment(t, x, y0, y, false, slot)?,
                Path::YThenX => self.segment(t, x0, y0, y, false, slot)? + self.segment(t, y, x0, x, true, slot)?,
            };
        }
        Ok((out[0], out[1]))
    }

    /// Equation residual before the time gauge is removed.
    fn raw_residual(&self, p: &Point, psi_t: f64) -> Result<f64> {
        let j = self.field.local(p)?;
        let (px, py) = self.gradient(&j);
        let lap = px.g[1] + py.g[2];
        Ok(match self.equation {
            PotentialEquation::Gradient => psi_t + 0.5 * (px.v * px.v + py.v * py.v) - lap,
            _ => psi_t + px.v * py.v - lap,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinePotentialReport {
    pub points: usize,
    /// Largest disagreement of `ψ` or `ψ_t` between the two paths.
    pub path_gap: f64,
    pub residual_max: f64,
}

pub fn line_potential_check(
    field: &dyn SpaceTimeField,
    equation: PotentialEquation,
    grid: &Grid,
    anchor: (f64, f64),
) -> Result<LinePotentialReport> {
    if equation == PotentialEquation::HarmonicPair {
        return Err(Error::InvalidInput("line potentials are defined for the gradient and swapped forms".into()));
    }
    let lp = LinePotential { field, equation, anchor };
    let gauges: Vec<f64> = grid
        .t_values
        .par_iter()
        .map(|&t| lp.raw_residual(&Point::new(t, anchor.0, anchor.1)?, 0.0))
        .collect::<Result<_>>()?;
    let per_point = grid
        .points()
        .par_iter()
        .map(|p| {
            let a = lp.value(p.t, p.x, p.y, Path::XThenY)?;
            let b = lp.value(p.t, p.x, p.y, Path::YThenX)?;
            let k = grid.t_values.iter().position(|&t| t == p.t).expect("grid time");
            let r = lp.raw_residual(p, a.1)? - gauges[k];
            Ok(((a.0 - b.0).abs().max((a.1 - b.1).abs()), r.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let path_gap = per_point.iter().fold(0.0f64, |m, r| m.max(r.0));
    let residual_max = per_point.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok(LinePotentialReport { points: per_point.len(), path_gap, residual_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, TOL_ALGEBRAIC};
    use crate::fields::{FdField, FnField};
    use crate::heat_kit::{HeatAtom, HeatSolution1D, HeatSolution2D};

    fn grid() -> Grid {
        Grid::uniform((0.5, 1.5, 3), (-1.0, 1.0, 4), (-1.0, 1.0, 4)).unwrap()
    }

    fn field(f: impl Fn([Jet; 3]) -> [Jet; 2] + Send + Sync + 'static) -> FnField {
        FnField::from_expr(move |c| Ok(f(c)))
    }

    #[test]
    fn burgers_examples() {
        let g = grid();
        let zero = field(|_| [Jet::ZERO; 2]);
        assert_eq!(burgers_residual(&zero, &g, 0.0).unwrap().max_residual(), 0.0);
        let shear = field(|[_, _, y]| [y, Jet::ZERO]);
        assert!(burgers_residual(&shear, &g, 0.0).unwrap().pass);
        let stretch = field(|[_, x, _]| [x, Jet::ZERO]);
        let j = stretch.local(&Point::new(1.0, 1.0, 0.3).unwrap()).unwrap();
        assert_eq!(burgers_residual_at(&j).0, 1.0);
        let r = burgers_residual(&stretch, &g, 1e-10).unwrap();
        assert!(!r.pass && r.equation("R1").unwrap().max == 1.0);
    }

    #[test]
    fn inviscid_examples() {
        let g = grid();
        let c = field(|_| [Jet::constant(0.3), Jet::constant(-2.0)]);
        assert!(inviscid_residual(&c, &g, 0.0).unwrap().pass);
        let radial = field(|[t, x, y]| [x / t, y / t]);
        assert!(inviscid_residual(&radial, &g, 1e-14).unwrap().pass);
        let tanh = field(|[_, x, _]| [x.tanh() * -2.0, Jet::ZERO]);
        assert!(burgers_residual(&tanh, &g, 1e-12).unwrap().pass);
        let r = inviscid_residual(&tanh, &g, 1e-10).unwrap();
        assert!(!r.pass && r.max_residual() > 0.1);
    }

    #[test]
    fn ns_examples() {
        let g = grid();
        let shear = field(|[_, _, y]| [y, Jet::ZERO]);
        assert!(ns_prolongation_check(&shear, &g, 0.0).unwrap().pass);
        let source = field(|[_, x, y]| [x, y]);
        let r = ns_prolongation_check(&source, &g, 1e-10).unwrap();
        assert_eq!(r.equation("R3").unwrap().max, 2.0);
        assert!(!r.pass);
        let spec = catalog::family("ns_common").unwrap();
        for params in spec.default_params() {
            let inst = spec.build(&params).unwrap();
            let r = ns_prolongation_check(inst.field.as_ref(), &inst.test_box.default_grid(), TOL_ALGEBRAIC).unwrap();
            assert!(r.pass, "{params}: {:?}", r.equations);
        }
    }

    #[test]
    fn constraint_examples() {
        let g = grid();
        let phi = HeatSolution2D::product(1.0, HeatSolution1D::cosh_mode(1.0), HeatSolution1D::cosh_mode(0.5))
            .plus(HeatSolution2D::constant(0.5));
        let hc = catalog::hopf_cole_2d(&phi);
        let c = constraint_values(hc.as_ref(), &g).unwrap();
        assert!(c[0].max < 1e-12);
        let hj = catalog::family("hj_family").unwrap();
        for params in hj.default_params() {
            let inst = hj.build(&params).unwrap();
            let (jets, _) = grid_jets(inst.field.as_ref(), &inst.test_box.default_grid()).unwrap();
            for (_, [u, v]) in jets {
                assert!((u.g[1] - v.g[2]).abs() < 1e-10);
                assert!((u.h[3] + u.h[5]).abs() < 1e-9 && (v.h[3] + v.h[5]).abs() < 1e-9);
            }
        }
        let theta = HeatSolution1D::constant(2.0).with(1.0, HeatAtom::Poly { n: 2 });
        let dbx = catalog::darboux(&theta);
        let g = catalog::family("darboux").unwrap().test_box.default_grid();
        assert_eq!(constraint_values(dbx.as_ref(), &g).unwrap()[3].max, 0.0);
    }

    #[test]
    fn classifier() {
        let hj = catalog::family("hj_family").unwrap();
        let inst = hj.build(&serde_json::json!({"f": [0.0, 0.0, -0.5]})).unwrap();
        let c = common_viscid_inviscid_classify(inst.field.as_ref(), &inst.test_box.default_grid(), 1e-10).unwrap();
        assert_eq!(c.label(), "intersection");
        let inst = catalog::family("affine_general")
            .unwrap()
            .build(&serde_json::json!({"c": [[1.0, 0.5], [0.3, 2.0]], "b0": [0.3, -0.2]}))
            .unwrap();
        let c = common_viscid_inviscid_classify(inst.field.as_ref(), &inst.test_box.default_grid(), 1e-10).unwrap();
        assert_eq!(c.label(), "subset_b");
        let phi = HeatSolution2D::constant(1.0).plus(HeatSolution2D::gauss(0.0, 0.2, -0.1).scaled(2.0));
        let hc = catalog::hopf_cole_2d(&phi);
        assert!(matches!(
            common_viscid_inviscid_classify(hc.as_ref(), &grid(), 1e-10),
            Err(Error::NotACommonSolution(_))
        ));
    }

    #[test]
    fn potential_examples() {
        let g = grid();
        let c = |_: &Point| Ok(Jet::constant(3.0));
        for which in [PotentialEquation::Gradient, PotentialEquation::Swapped, PotentialEquation::HarmonicPair] {
            assert!(potential_residuals(&c, &g, which, 0.0).unwrap().pass);
        }
        let phi = HeatSolution2D::product(1.0, HeatSolution1D::cosh_mode(1.0), HeatSolution1D::cosh_mode(0.7));
        let pot = catalog::hopf_cole_potential(&phi);
        let r = potential_residuals(pot.jet.as_ref(), &g, PotentialEquation::Gradient, 1e-10).unwrap();
        assert!(r.pass, "{:?}", r.residuals);
        let xy = |p: &Point| {
            let [t, x, y] = Jet::vars(p.t, p.x, p.y);
            Ok(x * y / t)
        };
        assert!(potential_residuals(&xy, &g, PotentialEquation::Swapped, 1e-14).unwrap().pass);
        assert!(potential_residuals(&xy, &g, PotentialEquation::HarmonicPair, 1e-14).unwrap().pass);
        assert!(!potential_residuals(&xy, &g, PotentialEquation::Gradient, 1e-3).unwrap().pass);
    }

    #[test]
    fn line_potentials() {
        let phi = HeatSolution2D::constant(1.0).plus(HeatSolution2D::gauss(0.0, 0.2, -0.1).scaled(2.0));
        let hc = catalog::hopf_cole_2d(&phi);
        let g = Grid::uniform((0.5, 1.5, 2), (-1.0, 1.0, 3), (-1.0, 1.0, 3)).unwrap();
        let r = line_potential_check(hc.as_ref(), PotentialEquation::Gradient, &g, (0.0, 0.0)).unwrap();
        assert!(r.path_gap < 1e-8 && r.residual_max < 1e-8, "{r:?}");
        // a field that is not curl free: the two paths disagree
        let rot = field(|[_, x, y]| [-y, x]);
        let r = line_potential_check(&rot, PotentialEquation::Gradient, &g, (0.0, 0.0)).unwrap();
        assert!(r.path_gap > 0.1);
        let tanh = field(|[_, x, _]| [x.tanh() * -2.0, Jet::ZERO]);
        assert!(line_potential_check(&tanh, PotentialEquation::Gradient, &g, (0.0, 0.0)).unwrap().residual_max < 1e-8);
    }

    #[test]
    fn fd_mode_agrees_with_analytic() {
        let phi = HeatSolution2D::product(1.0, HeatSolution1D::cosh_mode(1.0), HeatSolution1D::cosh_mode(0.7));
        let hc = catalog::hopf_cole_2d(&phi);
        let g = grid();
        let fd = FdField::new(hc.clone());
        let ra = burgers_residual(hc.as_ref(), &g, 1e-10).unwrap();
        let rf = burgers_residual(&fd, &g, 1e-6).unwrap();
        assert_eq!(rf.mode, DerivativeMode::FiniteDifference);
        assert!(ra.pass && rf.pass, "{} {}", ra.max_residual(), rf.max_residual());
    }

    #[test]
    fn masked_points_are_counted() {
        let radial = FnField::from_expr(|[t, x, y]| Ok([x / t, y / t])).with_singular(|p| p.t == 0.0);
        let g = Grid::uniform((0.0, 1.0, 3), (-1.0, 1.0, 2), (-1.0, 1.0, 2)).unwrap();
        let r = inviscid_residual(&radial, &g, 1e-14).unwrap();
        assert_eq!((r.points, r.masked), (8, 4));
        assert!(r.pass);
    }
}
