//! Extremal constants `Vₙ` for nonnegative cosine polynomials of degree `n ≤ 8`.
//!
//! The main entry points are [`compute_vn`] and [`Pipeline`]; the building
//! blocks (polynomial arithmetic, numerics, bound lines and the constrained
//! solver) are public for reuse and testing.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod format;
pub mod kkt_solver;
pub mod lowdegree;
pub mod numerics;
pub mod oracle;
pub mod pipeline;
pub mod trigpoly;

pub use bounds::{BoundLine, LowerBoundFunctional, Restriction};
pub use error::{Error, Result};
pub use kkt_solver::{
    ActiveSet, CertificateReport, ChiResult, Multipliers, PenaltySchedule, ReducedProblem, SolveOutcome,
};
pub use pipeline::{compute_vn, Pipeline, PipelineConfig, SweepRecord, VnResult};
pub use trigpoly::{CosinePolynomial, MembershipReport, SpectralFactor};
