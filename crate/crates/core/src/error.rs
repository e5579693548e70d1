use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its recursion limit before meeting tolerance.
    #[error("quadrature exceeded maximum recursion depth {depth}")]
    MaxDepthExceeded { depth: usize },

    /// Every bound line stays below the upper bound; the full Fejér range is returned.
    #[error("bound lines give no restriction; falling back to ({lo}, {hi}]")]
    NoRestriction { lo: f64, hi: f64 },

    /// No multistart run of a penalty solve converged.
    #[error("all {starts} starts failed to converge")]
    AllStartsFailed { starts: usize },

    /// No active-set subproblem produced a feasible converged point.
    #[error("no feasible subproblem outcome at a = {a}")]
    Infeasible { a: f64 },

    /// The final witness did not pass certification.
    #[error("certification failed: {0}")]
    CertificationFailed(String),

    /// Random sampling found no point satisfying every inequality.
    #[error("none of {samples} samples satisfied every inequality")]
    NoFeasibleSample { samples: usize },

    /// A hard-coded lower-bound functional failed its numerical verification.
    #[error("lower-bound functional `{name}` failed verification")]
    FunctionalRejected { name: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
