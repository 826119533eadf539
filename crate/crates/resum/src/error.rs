//! Error type shared by all modules of the crate.

use std::fmt;

/// Everything that can go wrong while building weights, solving saddle
/// points, evaluating kernels/series or running transforms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Construction input is malformed (empty multi-index, bad exponent...).
    InvalidWeight(String),
    /// The requested weight grows too fast for the framework (needs slow
    /// variation; e.g. a leading exponent >= 1 in the iterated-log form).
    FastGrowth(String),
    /// Argument outside the analyticity sector / domain of the operation.
    Domain(String),
    /// A tail integral that must converge does not (quasianalytic-side input).
    DivergentIntegral(String),
    /// Saddle solve requested for an argument below the supported threshold.
    BelowThreshold(String),
    /// Newton/bisection failed to locate a saddle within the iteration cap.
    SaddleFailure(String),
    /// Numerical integration failed to reach the requested tolerance.
    QuadratureFailure(String),
    /// A series could not be summed within the term budget or the working
    /// precision (cancellation exhausted the mantissa).
    TruncationFailure(String),
    /// The integrand of a summation/recovery integral grows at the largest
    /// usable argument: the method diverges at this evaluation point.
    DivergentIntegrand(String),
    /// Greedy selection in a constructive procedure ran out of budget; the
    /// payload carries the indices found so far.
    ConstructionIncomplete { detail: String, partial: Vec<u64> },
    /// Operation not supported for this weight kind (e.g. kernel evaluation
    /// for a weight given only by an explicit coefficient sequence).
    Unsupported(String),
    /// An operation precondition was violated by the caller.
    Precondition(String),
    /// Not enough usable samples to form a verdict.
    InsufficientData(String),
    /// Configuration / serialization problems (CLI, cache files).
    Config(String),
    /// I/O failure while reading or writing artifacts.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidWeight(m) => write!(f, "invalid weight: {m}"),
            Error::FastGrowth(m) => write!(f, "weight grows too fast: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::DivergentIntegral(m) => write!(f, "divergent integral: {m}"),
            Error::BelowThreshold(m) => write!(f, "below saddle threshold: {m}"),
            Error::SaddleFailure(m) => write!(f, "saddle solve failed: {m}"),
            Error::QuadratureFailure(m) => write!(f, "quadrature failed: {m}"),
            Error::TruncationFailure(m) => write!(f, "series truncation failed: {m}"),
            Error::DivergentIntegrand(m) => write!(f, "divergent integrand: {m}"),
            Error::ConstructionIncomplete { detail, partial } => {
                write!(f, "construction incomplete ({} indices found): {detail}", partial.len())
            }
            Error::Unsupported(m) => write!(f, "unsupported operation: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::InsufficientData(m) => write!(f, "insufficient data: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
