use thiserror::Error;

/// Errors raised by the analysis and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate distribution: variance is {variance:e}")]
    DegenerateDistribution { variance: f64 },

    #[error("distribution declared symmetric but check failed: {0}")]
    SymmetryMismatch(String),

    #[error("|theta| = {theta} exceeds the overflow guard {guard}")]
    OverflowGuard { theta: f64, guard: f64 },

    #[error("could not bracket the dual of u = {u}: |theta| passed {limit}")]
    BracketFailure { u: f64, limit: f64 },

    #[error("stationarity function has no sign change on [{lo}, {hi}]")]
    RangeExhausted { lo: f64, hi: f64 },

    #[error("expected exactly one zero of K'''K' + (p-2)K''^2, found {0}")]
    AssumptionViolated(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("tie function does not change sign on [{lo}, {hi}]")]
    TieNotBracketed { lo: f64, hi: f64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("closed form not available for {0}")]
    UnsupportedDistribution(String),

    #[error("unsupported subgraph: {0}")]
    UnsupportedSubgraph(String),

    #[error("exact enumeration too large: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short stable identifier for machine-readable reporting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::DegenerateDistribution { .. } => "degenerate_distribution",
            Error::SymmetryMismatch(_) => "symmetry_mismatch",
            Error::OverflowGuard { .. } => "overflow_guard",
            Error::BracketFailure { .. } => "bracket_failure",
            Error::RangeExhausted { .. } => "range_exhausted",
            Error::AssumptionViolated(_) => "assumption_violated",
            Error::Domain(_) => "domain_error",
            Error::TieNotBracketed { .. } => "tie_not_bracketed",
            Error::InternalInconsistency(_) => "internal_inconsistency",
            Error::UnsupportedDistribution(_) => "unsupported_distribution",
            Error::UnsupportedSubgraph(_) => "unsupported_subgraph",
            Error::TooLarge(_) => "too_large",
            Error::Parse(_) => "parse_error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
