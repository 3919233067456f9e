//! Explicit finite-difference solver for the Burgers system on a rectangle with Dirichlet
//! data taken from an exact solution, used to cross-validate exact solutions by evolution.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::TestBox;
use crate::error::{Error, Result};
use crate::fields::{Point, SpaceTimeField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

/// Rectangle, node counts, time range and step. `dt` is adjusted down so that the time range
/// holds a whole number of steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbvpSetup {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
}

/// Fraction of the diffusive bound `min(dx², dy²)/4` used by [`IbvpSetup::new`].
pub const DEFAULT_DT_FRACTION: f64 = 0.8;

const GROWTH_LIMIT: f64 = 1e3;

impl IbvpSetup {
    /// Setup with `dt` at [`DEFAULT_DT_FRACTION`] of the stability bound.
    pub fn new(x: (f64, f64), y: (f64, f64), n: [usize; 2], t: (f64, f64)) -> Result<IbvpSetup> {
        let mut s = IbvpSetup { x, y, nx: n[0], ny: n[1], t0: t.0, t1: t.1, dt: 1.0, integrator: Integrator::Rk4 };
        s.dt = DEFAULT_DT_FRACTION * s.stability_bound();
        s.validate()?;
        Ok(s)
    }

    /// Setup on the spatial part of a catalog test box, starting at its initial time.
    pub fn on_box(test_box: &TestBox, n: usize, span: f64) -> Result<IbvpSetup> {
        IbvpSetup::new(test_box.x, test_box.y, [n, n], (test_box.t.0, test_box.t.0 + span))
    }

    pub fn dx(&self) -> f64 {
        (self.x.1 - self.x.0) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y.1 - self.y.0) / (self.ny - 1) as f64
    }

    pub fn stability_bound(&self) -> f64 {
        self.dx().powi(2).min(self.dy().powi(2)) / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.x.0, self.x.1, self.y.0, self.y.1, self.t0, self.t1, self.dt];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("ibvp: non-finite setup".into()));
        }
        if self.nx < 3 || self.ny < 3 || self.x.1 <= self.x.0 || self.y.1 <= self.y.0 || self.t1 < self.t0 {
            return Err(Error::InvalidInput("ibvp: degenerate box or fewer than 3 nodes per side".into()));
        }
        if !(self.dt > 0.0) || self.dt > self.stability_bound() * (1.0 + 1e-12) {
            return Err(Error::ParameterOutOfDomain(format!(
                "dt = {} violates dt <= min(dx^2, dy^2)/4 = {}",
                self.dt,
                self.stability_bound()
            )));
        }
        Ok(())
    }

    /// Number of steps and the adjusted step.
    pub fn steps(&self) -> (usize, f64) {
        let span = self.t1 - self.t0;
        if span == 0.0 {
            return (0, self.dt);
        }
        let n = (span / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (n, span / n as f64)
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x.0 + i as f64 * self.dx(), self.y.0 + j as f64 * self.dy())
    }

    /// Same setup with both node counts refined `2^level` times and `dt` divided by `4^level`.
    pub fn refined(&self, level: u32) -> IbvpSetup {
        let k = 1usize << level;
        IbvpSetup { nx: (self.nx - 1) * k + 1, ny: (self.ny - 1) * k + 1, dt: self.dt / (k * k) as f64, ..*self }
    }

    /// Image under `(x, u) ↔ (y, v)`.
    pub fn mirrored(&self) -> IbvpSetup {
        IbvpSetup { x: self.y, y: self.x, nx: self.ny, ny: self.nx, ..*self }
    }

    fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    pub fn initial_state(&self, field: &dyn SpaceTimeField) -> Result<State> {
        let mut s = State { t: self.t0, nx: self.nx, ny: self.ny, u: vec![0.0; self.nx * self.ny], v: vec![0.0; self.nx * self.ny] };
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (u, v) = self.exact(field, self.t0, i, j)?;
                s.u[j * self.nx + i] = u;
                s.v[j * self.nx + i] = v;
            }
        }
        Ok(s)
    }

    fn exact(&self, field: &dyn SpaceTimeField, t: f64, i: usize, j: usize) -> Result<(f64, f64)> {
        let (x, y) = self.node(i, j);
        field.eval(&Point::new(t, x, y)?)
    }

    fn apply_boundary(&self, field: &dyn SpaceTimeField, t: f64, u: &mut [f64], v: &mut [f64]) -> Result<()> {
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.is_boundary(i, j) {
                    let (a, b) = self.exact(field, t, i, j)?;
                    u[j * self.nx + i] = a;
                    v[j * self.nx + i] = b;
                }
            }
        }
        Ok(())
    }

    /// Interior right-hand side: central differences for convection and diffusion.
    fn rhs(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (nx, ny) = (self.nx, self.ny);
        let (dx, dy) = (self.dx(), self.dy());
        let (ix2, iy2) = (1.0 / (dx * dx), 1.0 / (dy * dy));
        let mut du = vec![0.0; nx * ny];
        let mut dv = vec![0.0; nx * ny];
        du.par_chunks_mut(nx).zip(dv.par_chunks_mut(nx)).enumerate().for_each(|(j, (ru, rv))| {
            if j == 0 || j == ny - 1 {
                return;
            }
            for i in 1..nx - 1 {
                let c = j * nx + i;
                let (e, w, n, s) = (c + 1, c - 1, c + nx, c - nx);
                let (uc, vc) = (u[c], v[c]);
                let op = |f: &[f64]| {
                    let fx = (f[e] - f[w]) / (2.0 * dx);
                    let fy = (f[n] - f[s]) / (2.0 * dy);
                    let lap = (f[e] - 2.0 * f[c] + f[w]) * ix2 + (f[n] - 2.0 * f[c] + f[s]) * iy2;
                    lap - uc * fx - vc * fy
                };
                ru[i] = op(u);
                rv[i] = op(v);
            }
        });
        (du, dv)
    }

    /// One time step from `state`, with boundary values sampled from `field` at each stage time.
    pub fn step(&self, field: &dyn SpaceTimeField, state: &State, dt: f64) -> Result<State> {
        if dt > self.stability_bound() * (1.0 + 1e-12) {
            return Err(Error::ParameterOutOfDomain(format!("dt = {dt} exceeds the stability bound")));
        }
        let axpy = |base: &[f64], k: &[f64], a: f64| base.iter().zip(k).map(|(b, k)| b + a * k).collect::<Vec<f64>>();
        let t = state.t;
        let (mut u, mut v) = match self.integrator {
            Integrator::Euler => {
                let (ku, kv) = self.rhs(&state.u, &state.v);
                (axpy(&state.u, &ku, dt), axpy(&state.v, &kv, dt))
            }
            Integrator::Rk4 => {
                let (k1u, k1v) = self.rhs(&state.u, &state.v);
                let mut su = axpy(&state.u, &k1u, 0.5 * dt);
                let mut sv = axpy(&state.v, &k1v, 0.5 * dt);
                self.apply_boundary(field, t + 0.5 * dt, &mut su, &mut sv)?;
                let (k2u, k2v) = self.rhs(&su, &sv);
                let mut su = axpy(&state.u, &k2u, 0.5 * dt);
                let mut sv = axpy(&state.v, &k2v, 0.5 * dt);
                self.apply_boundary(field, t + 0.5 * dt, &mut su, &mut sv)?;
                let (k3u, k3v) = self.rhs(&su, &sv);
                let mut su = axpy(&state.u, &k3u, dt);
                let mut sv = axpy(&state.v, &k3v, dt);
                self.apply_boundary(field, t + dt, &mut su, &mut sv)?;
                let (k4u, k4v) = self.rhs(&su, &sv);
                let comb = |b: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| {
                    (0..b.len()).map(|c| b[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])).collect::<Vec<f64>>()
                };
                (comb(&state.u, &k1u, &k2u, &k3u, &k4u), comb(&state.v, &k1v, &k2v, &k3v, &k4v))
            }
        };
        self.apply_boundary(field, t + dt, &mut u, &mut v)?;
        Ok(State { t: t + dt, nx: self.nx, ny: self.ny, u, v })
    }

    /// March from `t0` to `t1`.
    pub fn evolve(&self, field: &dyn SpaceTimeField) -> Result<State> {
        self.validate()?;
        let mut state = self.initial_state(field)?;
        let limit = GROWTH_LIMIT * {
            let m = state.max_abs();
            if m > 0.0 {
                m
            } else {
                1.0
            }
        };
        let (n, dt) = self.steps();
        for k in 0..n {
            state = self.step(field, &state, dt)?;
            // pin the clock to avoid drift from repeated addition
            state.t = self.t0 + (k + 1) as f64 * dt;
            let m = state.max_abs();
            if !(m <= limit) {
                return Err(Error::UnstableStep(m));
            }
        }
        Ok(state)
    }

    /// Max-norm distance of `state` from `field` over all nodes.
    pub fn max_error(&self, field: &dyn SpaceTimeField, state: &State) -> Result<f64> {
        let mut e = 0.0f64;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (u, v) = self.exact(field, state.t, i, j)?;
                let c = j * self.nx + i;
                e = e.max((state.u[c] - u).abs()).max((state.v[c] - v).abs());
            }
        }
        Ok(e)
    }

    /// CSV with header `t,x,y,u,v`.
    pub fn write_csv(&self, state: &State, out: &mut dyn Write) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
        writeln!(out, "t,x,y,u,v").map_err(io)?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.node(i, j);
                let c = j * self.nx + i;
                writeln!(out, "{},{},{},{},{}", state.t, x, y, state.u[c], state.v[c]).map_err(io)?;
            }
        }
        Ok(())
    }
}

/// Nodal values, row-major with `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0f64, |m, a| if a.is_nan() || m.is_nan() { f64::NAN } else { m.max(a.abs()) })
    }

    /// Image under `(x, u) ↔ (y, v)`.
    pub fn mirrored(&self) -> State {
        let (nx, ny) = (self.nx, self.ny);
        let mut u = vec![0.0; nx * ny];
        let mut v = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                u[i * ny + j] = self.v[j * nx + i];
                v[i * ny + j] = self.u[j * nx + i];
            }
        }
        State { t: self.t, nx: ny, ny: nx, u, v }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub steps: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelResult>,
    /// `log2(e_j / e_{j+1})` for consecutive levels.
    pub orders: Vec<f64>,
    /// Errors at rounding level on every grid.
    pub exact: bool,
}

/// Rounding-level threshold for errors of fields of size `scale`.
pub const EXACT_TOL: f64 = 1e-11;

impl ConvergenceReport {
    /// Smallest observed order; infinite when the scheme is exact.
    pub fn order(&self) -> f64 {
        if self.exact {
            return f64::INFINITY;
        }
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Evolve on `levels` successively refined grids starting from `setup` (dt ∝ dx²) and compare
/// with `field` at the final time.
pub fn cross_validate(field: &dyn SpaceTimeField, setup: &IbvpSetup, levels: u32) -> Result<ConvergenceReport> {
    if levels == 0 {
        return Err(Error::InvalidInput("cross_validate needs at least one level".into()));
    }
    let mut out = Vec::new();
    let mut scale = 1.0f64;
    for level in 0..levels {
        let s = setup.refined(level);
        let state = s.evolve(field)?;
        scale = scale.max(state.max_abs());
        let (steps, dt) = s.steps();
        out.push(LevelResult { nx: s.nx, ny: s.ny, dt, steps, error: s.max_error(field, &state)? });
    }
    let orders = out.windows(2).map(|w| (w[0].error / w[1].error).log2()).collect();
    let exact = out.iter().all(|l| l.error <= EXACT_TOL * scale);
    Ok(ConvergenceReport { levels: out, orders, exact })
}
