use thiserror::Error;

use crate::padic::Valuation;

/// Precision attempts made before giving up: `(t_order, p_precision)`.
pub type PrecisionTrace = Vec<(usize, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(u32, u32),

    #[error("not a unit (valuation {0})")]
    NonUnit(Valuation),

    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("exponent overflow at column {column} (max {max})")]
    ExponentOverflow { column: usize, max: u32 },

    #[error("resource limit exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("partial derivative is not a unit at the anchor point (L(f,P) = {0})")]
    NonUnitDerivative(Valuation),

    #[error("anchor point is not on the curve: f(P) has valuation {0}")]
    NotOnCurve(Valuation),

    #[error("rescaling by e = {e} is not exact: {detail}")]
    InexactRescale { e: u32, detail: String },

    #[error("insufficient series precision: {0}")]
    Precision(String),

    #[error("order of vanishing inconclusive after precision escalation; trace (T, N) = {0:?}")]
    Inconclusive(PrecisionTrace),

    #[error("c(f) >= {depth}: partial derivatives vanish to the probe depth, increase depth")]
    DepthExhausted { depth: u32 },

    #[error("g is constant on the curve: the sum does not decay and the bound is inapplicable")]
    ConstantOnCurve,

    #[error("level mismatch: points at level {points}, phase at level {phase}")]
    LevelMismatch { points: u32, phase: u32 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
