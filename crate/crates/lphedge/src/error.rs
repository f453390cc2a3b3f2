//! Error types shared across the crate.
//!
//! Every fallible operation returns [`Result`]; validation happens when
//! domain types are constructed so that downstream math can stay panic-free.

use thiserror::Error;

/// Errors produced by position math, replication, and pricing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpHedgeError {
    /// Input failed validation (non-positive price, inverted range, bad
    /// parameter combination, unsupported kind for the requested operation).
    #[error("invalid input: {message}")]
    InvalidInput { message: String },

    /// Inputs are well-formed but outside the mathematical domain of the
    /// operation (e.g. a Fourier transform evaluated off its validity strip,
    /// or an option price outside its no-arbitrage bounds).
    #[error("domain error: {message}")]
    Domain { message: String },

    /// A numerical routine failed to converge or produced a non-finite
    /// intermediate (ODE step-size underflow, root bracketing failure).
    #[error("numerical error: {message}")]
    Numerical { message: String },

    /// Adaptive quadrature could not reach its tolerance; `leg` names the
    /// pricing component whose integral failed.
    #[error("quadrature failed for {leg}: {message}")]
    Quadrature { leg: String, message: String },

    /// An option-chain lookup found no quote for one or more strikes.
    #[error("option chain is missing strikes: {strikes:?}")]
    MissingStrikes { strikes: Vec<f64> },
}

impl LpHedgeError {
    /// Shorthand for [`LpHedgeError::InvalidInput`].
    pub fn invalid(message: impl Into<String>) -> Self {
        Self::InvalidInput { message: message.into() }
    }

    /// Shorthand for [`LpHedgeError::Domain`].
    pub fn domain(message: impl Into<String>) -> Self {
        Self::Domain { message: message.into() }
    }

    /// Shorthand for [`LpHedgeError::Numerical`].
    pub fn numerical(message: impl Into<String>) -> Self {
        Self::Numerical { message: message.into() }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LpHedgeError>;

/// Validates that `value` is finite and strictly positive.
///
/// # Errors
///
/// Returns [`LpHedgeError::InvalidInput`] naming `what` otherwise.
pub(crate) fn validate_positive(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(LpHedgeError::invalid(format!("{what} must be positive and finite, got {value}")))
    }
}

/// Validates that `value` is finite (any sign).
///
/// # Errors
///
/// Returns [`LpHedgeError::InvalidInput`] naming `what` otherwise.
pub(crate) fn validate_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(LpHedgeError::invalid(format!("{what} must be finite, got {value}")))
    }
}
