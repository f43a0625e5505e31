use thiserror::Error;

use crate::lattice::LatticeField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root find for the elliptic modulus failed: {0}")]
    RootFind(String),

    #[error(
        "minimizer did not converge after {iterations} iterations \
         (best energy {best_energy:.6e}, grad norm {grad_norm:.3e})"
    )]
    NotConverged {
        iterations: usize,
        best_energy: f64,
        grad_norm: f64,
        best: Box<LatticeField>,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("malformed field data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
