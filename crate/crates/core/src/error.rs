use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Coincident endpoints, a zero-length outer edge, or similar.
    #[error("degenerate curve: {0}")]
    Degenerate(String),

    /// The parameterization has (numerically) zero speed.
    #[error("cusp at t = {t}: speed {speed:e}")]
    Cusp { t: f64, speed: f64 },

    /// Input rejected by the angle constraints required by the geometric projection.
    #[error("angle constraints violated: beta1 = {beta1:.6}, beta2 = {beta2:.6}")]
    AngleConstraintViolation { beta1: f64, beta2: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
