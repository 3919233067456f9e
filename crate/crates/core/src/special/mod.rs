//! Special functions: Weierstrass ℘ with `g2 = 0`, Lamé and confluent Heun initial-value
//! problems, and the complex root solver for the Hamilton–Jacobi parametrization.

pub mod heun;
pub mod hj;
pub mod lame;
pub mod ode;
pub mod wp;

pub use heun::heun_c;
pub use hj::{hj_root, ComplexRootProblem};
pub use lame::{lame_solve, LameSolution};
pub use wp::wp;
