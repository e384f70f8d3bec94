//! Simulation and analysis of Caputo fractional-order Newton–Leipnik dynamics.
//!
//! The crate is organised bottom-up:
//!
//! - [`fractional`]: Caputo numerics (Γ, Mittag–Leffler, L1 weights, the
//!   Adams–Bashforth–Moulton predictor–corrector).
//! - [`model`]: the Newton–Leipnik vector field, Jacobian, dissipativity and
//!   equilibria.
//! - [`stability`]: eigenvalue-argument tests for commensurate and
//!   incommensurate orders plus the per-mode synchronization conditions.
//! - [`pde`]: the time-fractional reaction–diffusion solver on a 1-D Neumann
//!   interval.
//! - [`sync`]: master–slave complete synchronization with the nonlinear
//!   cancelling controller.
//! - [`io`]: experiment specs, CSV/manifest artifacts and the run driver used
//!   by the `fracsync` binary.

pub mod error;
pub mod fractional;
pub mod io;
pub mod model;
pub mod pde;
pub mod stability;
pub mod sync;

pub use error::{Error, Result};
