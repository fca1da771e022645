use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("no convergence after {iterations} iterations (last sup difference {last_diff:e})")]
    NoConvergence { iterations: usize, last_diff: f64 },
    #[error("step degeneration at t = {t}: admissible step {step:e} is shorter than the next panel {panel:e}")]
    StepDegeneration { t: f64, step: f64, panel: f64 },
    #[error("singular linear system at node {node}")]
    Singular { node: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
