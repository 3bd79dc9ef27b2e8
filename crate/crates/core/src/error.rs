use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mass profile is not positive at x = {x} (m = {mass})")]
    NonPositiveMass { x: f64, mass: f64 },

    #[error("integration failed near x = {x}: {reason}")]
    IntegrationFailure { x: f64, reason: String },

    /// The two homogeneous solutions are (numerically) proportional, which
    /// happens when ω sits on a bound-state pole of G₀.
    #[error("homogeneous solutions are linearly dependent (independence measure {measure:e})")]
    DependentSolutions { measure: f64 },

    #[error("m(x)/Δ(x) is not constant: relative spread {spread:e} exceeds {tolerance:e}")]
    NonConstantReduced { spread: f64, tolerance: f64 },

    #[error("dressing denominator 1 + α·G₀(0,0) vanishes (|value| = {magnitude:e})")]
    ResonantDenominator { magnitude: f64 },

    #[error("G₀(0,0) vanishes (relative magnitude {magnitude:e})")]
    ZeroDiagonal { magnitude: f64 },

    #[error("singular denominator {which} (|value| = {magnitude:e})")]
    SingularDenominator { which: &'static str, magnitude: f64 },

    #[error("channel on the {side} flank is evanescent")]
    EvanescentChannel { side: &'static str },

    #[error("probe point x = {x} lies inside the interaction window [{lo}, {hi}]")]
    WindowViolation { x: f64, lo: f64, hi: f64 },

    #[error("packet weight outside the frequency grid is {tail:e} (tolerance {tolerance:e})")]
    SpectralTruncation { tail: f64, tolerance: f64 },

    #[error("propagator calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("malformed table at line {line}: {reason}")]
    Table { line: usize, reason: String },
}

impl Error {
    /// Short stable name of the variant, for machine-readable reporting.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NonPositiveMass { .. } => "NonPositiveMass",
            Error::IntegrationFailure { .. } => "IntegrationFailure",
            Error::DependentSolutions { .. } => "DependentSolutions",
            Error::NonConstantReduced { .. } => "NonConstantReduced",
            Error::ResonantDenominator { .. } => "ResonantDenominator",
            Error::ZeroDiagonal { .. } => "ZeroDiagonal",
            Error::SingularDenominator { .. } => "SingularDenominator",
            Error::EvanescentChannel { .. } => "EvanescentChannel",
            Error::WindowViolation { .. } => "WindowViolation",
            Error::SpectralTruncation { .. } => "SpectralTruncation",
            Error::CalibrationFailure(_) => "CalibrationFailure",
            Error::Table { .. } => "TableError",
        }
    }
}
