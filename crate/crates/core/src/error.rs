use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    /// The cell-index truncation drops too much Gaussian mass.
    #[error("kappa = {kappa} keeps only {mass} of the cell mass; increase kappa")]
    KappaTooSmall { kappa: u32, mass: f64 },
    /// Adaptive quadrature ran out of subdivisions.
    #[error("quadrature did not converge (best estimate {estimate})")]
    Convergence { estimate: f64 },
    #[error("no fine step gives unit variance: sigma^2(delta, 0) = {sigma_sq_at_zero}")]
    NoSolution { sigma_sq_at_zero: f64 },
    #[error("embedding variance is not monotone in the fine step for delta = {delta_coarse}")]
    NotMonotone { delta_coarse: f64 },
    #[error("no odd repetition factor up to {cap} meets the target error probability")]
    Infeasible { cap: u64 },
    #[error("no spread carrier found after {attempts} nonces")]
    DegenerateKey { attempts: u32 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for numerical non-convergence, as opposed to bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;
