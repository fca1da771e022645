//! Spectral Galerkin solver for the time-fractional Stokes problem on a
//! divergence-free basis, plus the checks of its a priori estimates.
//!
//! On an H-orthonormal, V-orthogonal basis the Galerkin system is diagonal:
//! `cD^α g_j + νλ_j g_j = f_j`, `g_j(0) = (u₀, w_j)_H`. Each mode is solved
//! independently by one of the [`crate::fracode`] paths.

mod checks;
mod modes;
mod problem;
mod solve;

pub use checks::{
    energy_report, shift_scaling, two_discretization_agreement, weak_residual, ShiftFit, AGREEMENT_BUDGET, AGREEMENT_N,
    ENERGY_REL_TOL, SHIFT_SLOPE_SLACK,
};
pub use modes::{torus_modes, Mode, ModeSet, Trig};
pub use problem::{random_instance, AssembledSystem, GalerkinProblem, SolveMethod, TrigTerm, RANDOM_INSTANCE_N};
pub use solve::{solve, GalerkinSolution};
