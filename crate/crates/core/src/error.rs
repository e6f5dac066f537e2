use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value produced while {0}")]
    NonFinite(&'static str),

    #[error("composed operator order {order} exceeds the cap of {cap}")]
    OperatorOrderCap { order: usize, cap: usize },

    #[error("the zero polynomial has no well-defined roots")]
    ZeroPolynomial,

    #[error("coincident roots: minimum separation {separation:.3e} is below {limit:.3e}")]
    CoincidentRoots { separation: f64, limit: f64 },

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("eigensolver did not converge after {iterations} iterations during {context}")]
    EigenNoConvergence {
        iterations: usize,
        context: &'static str,
    },

    #[error("internal consistency check failed: {what} deviates by {deviation:.3e}")]
    ConsistencyCheck { what: &'static str, deviation: f64 },

    #[error("channel coupling is zero; the partner component is not determined by this route")]
    ZeroCoupling,
}

pub type Result<T> = std::result::Result<T, Error>;
