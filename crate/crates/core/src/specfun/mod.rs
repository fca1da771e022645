//! Gamma and Mittag-Leffler functions.
//!
//! These are the analytic references for every closed-form solution and
//! a priori bound in the crate: `E_{α,β}(z) = Σ z^k / Γ(αk + β)`.

mod gamma;
mod mittag_leffler;

pub use gamma::{gamma, lgamma, rgamma, tgamma};
pub use mittag_leffler::{
    gronwall_envelope, mittag_leffler, EnvelopeVariant, MlParams, Z_MAX,
};
