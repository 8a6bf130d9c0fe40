use thiserror::Error;

use crate::dynamics::IntegrationFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point handed to the model lies outside its chart.
    #[error("point {coords:?} lies outside the chart domain of {model}")]
    Domain { model: String, coords: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Integration(Box<IntegrationFailure>),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("picard iteration did not converge after {iterations} iterations (last change {residual:e})")]
    PicardDiverged { iterations: usize, residual: f64 },

    #[error("picard iterate left the certified box at t = {t}: {detail}")]
    CertificateViolation { t: f64, detail: String },

    #[error("no usable direction for growth classification: {0}")]
    Growth(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad user input, as opposed to numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Config(_) | Error::Dimension { .. } | Error::Domain { .. }
        )
    }
}

impl From<IntegrationFailure> for Error {
    fn from(f: IntegrationFailure) -> Self {
        Error::Integration(Box::new(f))
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}
