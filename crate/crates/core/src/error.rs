use thiserror::Error;

/// Errors raised by the exponent engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero divisor")]
    ZeroDivisor,

    #[error("undefined gcd: both arguments are zero")]
    UndefinedGcd,

    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,

    #[error("invalid equation: {0}")]
    InvalidEquation(String),

    #[error("inconsistent: {0}")]
    Inconsistent(String),

    /// Every unresolved coefficient index `k` (coefficient of `z^-k`) is listed.
    #[error("free parameter at position {}", format_positions(.0))]
    FreeParameters(Vec<i64>),

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("series appears rational: remainder vanished through {known} known coefficients")]
    AppearsRational { known: usize },

    #[error("precision budget exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("insufficient certified expansion: {0}")]
    InsufficientExpansion(String),

    #[error("lower bound undefined: u = 0 and deg B = 0")]
    LowerBoundUndefined,

    #[error("degenerate orbit: limiting denominator vanishes")]
    DegenerateOrbit,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("factorization failure: {0}")]
    Factorization(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn format_positions(positions: &[i64]) -> String {
    positions
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
