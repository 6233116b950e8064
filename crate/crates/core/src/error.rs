use std::fmt;

use thiserror::Error;

use crate::expr::{EvalError, ParseError};

/// Which one-sided limit is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]: endpoints must be finite with a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("point {x} lies outside the domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("point {x} must be strictly inside ({a}, {b})")]
    NotInterior { x: f64, a: f64, b: f64 },

    #[error("{side} derivative is undefined at the endpoint {x}")]
    UndefinedSide { x: f64, side: Side },

    #[error("evaluation failed at {at}: {detail}")]
    Evaluation { at: f64, detail: String },

    #[error("function is not convex: {0}")]
    NotConvex(String),

    #[error("not differentiable at {x}: left derivative {left}, right derivative {right}")]
    NotDifferentiable { x: f64, left: f64, right: f64 },

    #[error("unknown catalog entry '{0}'")]
    UnknownFunction(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inverted enclosure: lo = {lo} > hi = {hi}")]
    InvertedEnclosure { lo: f64, hi: f64 },

    #[error(
        "remainder bounds inverted on cell {cell} = [{left}, {right}] (lo = {lo} > hi = {hi}); \
         the integrand is not convex there"
    )]
    ConvexityViolation {
        cell: usize,
        left: f64,
        right: f64,
        lo: f64,
        hi: f64,
    },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distributions have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error(
        "divergence undefined at index {index}: p = 0 < q = {q} and the generator declares no \
         slope at infinity"
    )]
    UndefinedDivergence { index: usize, q: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, Error>;
