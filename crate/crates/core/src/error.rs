use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {dim}: need at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("Wei-Norman denominator vanishes at t = {t}")]
    Pole { t: f64 },

    #[error("factorized propagator breaks down at t = {t}: |{coefficient}| = {magnitude} >= 1")]
    RegimeBreakdown {
        t: f64,
        coefficient: &'static str,
        magnitude: f64,
    },

    #[error("operation requires the {required} regime, parameters are {found}")]
    WrongRegime {
        required: &'static str,
        found: &'static str,
    },

    #[error("integration diverged at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    #[error("Riccati integration blew up at t = {t} (|alpha| = {magnitude})")]
    BlowUp { t: f64, magnitude: f64 },

    #[error("generator is not Hermitian at t = {t} (residual {residual:e})")]
    NotHermitian { t: f64, residual: f64 },
}
