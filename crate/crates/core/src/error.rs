use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Numeric failures that carry meaning (a divergent tail, a failed
/// precondition) are errors rather than panics so that drivers can turn them
/// into reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {t} outside domain ({lo}, {hi})")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("function is not nondecreasing on the grid near t = {at}")]
    NotMonotone { at: f64 },

    #[error("non-finite value in {what} at {at}")]
    NonFinite { what: String, at: f64 },

    #[error("{what} does not stabilize under the x10 probe (base {base}, probe {probe})")]
    Divergent { what: String, base: f64, probe: f64 },

    #[error("{what}: oscillation-dominated cancellation (base {base}, probe {probe})")]
    OscillatoryCancellation { what: String, base: f64, probe: f64 },

    #[error("precondition failed: {clause}")]
    Precondition { clause: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: String, name: String },

    #[error("series did not reach tolerance within {cap} terms")]
    TruncationCap { cap: usize },

    #[error("quadrature would need more than {cap} panels on [{a}, {b}]")]
    PanelCap { a: f64, b: f64, cap: usize },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub fn precondition(clause: impl Into<String>) -> Self {
        Error::Precondition {
            clause: clause.into(),
        }
    }

    pub fn non_finite(what: &str, at: f64) -> Self {
        Error::NonFinite {
            what: what.to_string(),
            at,
        }
    }

    /// True for the two "the integral never settled" variants.
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::Divergent { .. } | Error::OscillatoryCancellation { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
