use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Payloads are stored as `f64` regardless of the scalar type the failing
/// computation ran in, so that the error type stays non-generic.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {what} exceeds threshold {threshold}")]
    Overflow { what: String, threshold: f64 },

    #[error("quadrature budget of {evaluations} evaluations exceeded (best estimate {best_re}+{best_im}i, error estimate {error_estimate})")]
    BudgetExceeded {
        best_re: f64,
        best_im: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("zero-mean condition violated: integral of u1 is {integral}")]
    ZeroMeanViolation { integral: f64 },

    #[error("effective support radius ladder exhausted at {radius} for eps {eps}")]
    RadiusLadderExhausted { radius: f64, eps: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("instability at x = {x}: {reason}")]
    Instability { x: f64, reason: String },

    #[error("step size underflow at x = {x} (h = {h})")]
    Stiffness { x: f64, h: f64 },

    #[error("|k| = {k_abs} is closer to the origin than k_min = {k_min}")]
    TooCloseToOrigin { k_abs: f64, k_min: f64 },

    #[error("near-zero scattering denominator |{entry}| = {value} at k = {k_re}+{k_im}i (soliton suspected)")]
    NearZeroDenominator {
        entry: String,
        value: f64,
        k_re: f64,
        k_im: f64,
    },

    #[error("spectral line node {index} (k = {k}) failed: {source}")]
    Node {
        index: usize,
        k: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("sector violation: {0}")]
    SectorViolation(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("grid too short: |r1| = {abs_r1} at k_max = {k_max}")]
    GridTooShort { k_max: f64, abs_r1: f64 },

    #[error("branch error: {0}")]
    Branch(String),

    #[error("PDE stability failure at step {step} (t = {t}): {reason}")]
    PdeStability { step: usize, t: f64, reason: String },

    #[error("domain too small: need half-length {required}, have {available}")]
    DomainTooSmall { required: f64, available: f64 },
}

impl Error {
    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors that come from numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Overflow { .. }
            | Error::BudgetExceeded { .. }
            | Error::Instability { .. }
            | Error::Stiffness { .. }
            | Error::PdeStability { .. } => true,
            Error::Node { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
