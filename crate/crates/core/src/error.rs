use thiserror::Error;

/// Errors raised by the bound, quadrature and code routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity must exceed 2 (got {0})")]
    Capacity(f64),

    #[error("degree {0} exceeds the supported maximum {1}")]
    DegreeTooLarge(usize, usize),

    #[error("s = {s} lies outside the validity interval [{lo}, {hi}] for degree {m}")]
    Validity { m: usize, s: f64, lo: f64, hi: f64 },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("quadrature rule inconsistent: {0}")]
    Quadrature(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("invalid node multiset: {0}")]
    Nodes(String),

    #[error("invalid weighted code: {0}")]
    Code(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
