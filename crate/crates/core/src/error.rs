use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Two objects that must agree in size do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The edge set handed to a pricing-scheme construction is not cyclically monotone.
    #[error("edge set is not cyclically c-monotone: positive cycle through vertices {cycle:?}")]
    NotCyclicallyMonotone { cycle: Vec<usize> },

    /// Exhaustive scheme enumeration refused to run on an instance that is too large.
    #[error("cost of size {rows}x{cols} exceeds the enumeration bound {bound}x{bound}; use the ordered fast path")]
    EnumerationBound { rows: usize, cols: usize, bound: usize },

    /// A numerical routine failed or could not certify its result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The SDP solver stopped without an optimal certificate.
    #[error("SDP solve ended with status {status:?} (primal feas {primal_feas:.3e}, dual feas {dual_feas:.3e}, gap {gap:.3e})")]
    Solver {
        status: crate::sdp::SolveStatus,
        primal_feas: f64,
        dual_feas: f64,
        gap: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
