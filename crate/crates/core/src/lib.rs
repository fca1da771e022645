//! Numerical building blocks for time-fractional Stokes problems.
//!
//! * [`specfun`]: Gamma and Mittag-Leffler functions.
//! * [`fracops`]: Riemann–Liouville integrals and Caputo derivatives of
//!   sampled trajectories.
//! * [`weighted`]: terminal-weighted Bochner norms `L^p_α(0,T;X)`, their
//!   embedding constants and a catalog of singular witness functions.
//! * [`fracode`]: Caputo initial-value problem solvers.
//! * [`galerkin`]: spectral Galerkin solver and energy-estimate checks.

pub mod config;
pub mod error;
pub mod fracode;
pub mod fracops;
pub mod galerkin;
pub mod grid;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod sum;
pub mod weighted;

pub use error::{Error, Result};
pub use grid::{FracOrder, GridKind, TimeGrid, Trajectory};
pub use report::CheckReport;
