//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the phase-noise model, synthesis, link chain and
/// experiment orchestration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs violate a structural contract (length, rate, pilot set).
    #[error("contract error: {0}")]
    Contract(String),

    /// Quadrature met a non-finite PSD value.
    #[error("non-finite PSD value {value} at offset {offset_hz} Hz")]
    NonFinitePsd { offset_hz: f64, value: f64 },

    /// A Monte-Carlo cell produced a non-finite metric.
    #[error("non-finite metric in cell (run {run}, snr {snr_db} dB): {what}")]
    NonFiniteMetric {
        run: usize,
        snr_db: f64,
        what: &'static str,
    },

    /// Configuration file or override could not be interpreted.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for errors that come from numerical evaluation rather than input
    /// validation.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinitePsd { .. } | Error::NonFiniteMetric { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
