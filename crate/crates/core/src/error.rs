use thiserror::Error;

/// Errors raised by the geometry kernel and everything built on top of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("points belong to different geometries")]
    MixedGeometry,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("direction between coincident points is undefined")]
    UndefinedDirection,
    #[error("grazing angle t = {t:e} is below the guard {guard:e}")]
    Grazing { t: f64, guard: f64 },
    #[error("containment violated: {0}")]
    Containment(String),
    #[error("string too long: {0}")]
    StringTooLong(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("caustic must be verified first (tangency residual {residual:e} > {tolerance:e})")]
    VerificationRequired { residual: f64, tolerance: f64 },
    #[error("chord straddles a curvature discontinuity at s = {0}")]
    Straddle(f64),
    #[error("experiment setup failed: {0}")]
    Setup(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

impl Error {
    /// Short machine-readable tag, used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MixedGeometry => "mixed-geometry",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Domain(_) => "domain",
            Error::UndefinedDirection => "undefined-direction",
            Error::Grazing { .. } => "grazing",
            Error::Containment(_) => "containment",
            Error::StringTooLong(_) => "string-too-long",
            Error::HypothesisViolated(_) => "hypothesis-violated",
            Error::VerificationRequired { .. } => "verification-required",
            Error::Straddle(_) => "straddle",
            Error::Setup(_) => "setup",
            Error::Precondition(_) => "precondition",
            Error::Solver(_) => "solver",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
