//! Exact solutions, point symmetries, reductions and residual oracles for the
//! two-dimensional Burgers system
//!
//! ```text
//! u_t + u u_x + v u_y = u_xx + u_yy
//! v_t + u v_x + v v_y = v_xx + v_yy
//! ```

pub mod catalog;
pub mod error;
pub mod evolve;
pub mod fields;
pub mod heat_kit;
pub mod jet;
pub mod lie_algebra;
pub mod reduce;
pub mod special;
pub mod sym_group;
pub mod verify;

pub use error::{Error, Result};
