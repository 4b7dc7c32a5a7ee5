use thiserror::Error;

/// Errors raised across the geometry pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis dimension mismatch")]
    DimensionMismatch,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("hodge star defined only on 4-dim basis")]
    HodgeDimension,
    #[error("split requires a 2-form")]
    SplitDegree,
    #[error("invalid complex pairing: {0}")]
    InvalidPairing(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{check} at point {point:?}")]
    Invariant { check: String, point: Vec<f64> },
    #[error("seed degenerate at point {0:?}")]
    DegenerateSeed(Vec<f64>),
    #[error("point too close to boundary: {0:?}")]
    Boundary(Vec<f64>),
    #[error("fiber coordinate out of chart: |zeta| = {0}")]
    FiberOutOfChart(f64),
    #[error("unknown surface `{0}`")]
    UnknownSurface(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no closed formula for this connection; use the oracle path")]
    NoFormula,
    #[error("formula not applicable: {0}")]
    NotApplicable(String),
    #[error("non-unitary group element")]
    NonUnitary,
    #[error("malformed index pattern `{0}`")]
    Pattern(String),
}

pub type Result<T> = std::result::Result<T, Error>;
