//! Event-driven simulation and analysis of a dry-friction oscillator on a
//! moving belt.
//!
//! The oscillator is the planar Filippov system
//!
//! ```text
//! x1' = x2
//! x2' = -x1 - eps*c*x2 - sign(x2 - V) * (1 + F(x2 - V, eps))
//! ```
//!
//! with a switching manifold at `x2 = V` (the belt speed). The crate provides
//!
//! * [`model`] — parameters, friction-law contract, slip vector fields and the
//!   sliding-segment geometry,
//! * [`integrator`] — adaptive event-driven integration of slip arcs with
//!   manifold-contact localization, plus the exact sliding step,
//! * [`criterion`] — the grazing integral, perturbation margin, blow-up roots
//!   and the Stribeck/divergence closed forms,
//! * [`detector`] — return-map evaluation from the grazing point and
//!   stick-slip cycle detection,
//! * [`sweep`] — parameter grid sweeps and criterion-boundary bisection,
//! * [`config`] / [`export`] — JSON configuration and deterministic CSV/JSON
//!   report emission.

pub mod config;
pub mod criterion;
pub mod detector;
pub mod export;
pub mod integrator;
pub mod model;
pub mod simulate;
pub mod sweep;

use thiserror::Error;

/// Toolkit-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation rejected its inputs.
    #[error("invalid {name}: {reason}")]
    InvalidInput { name: String, reason: String },

    /// Configuration file could not be parsed or validated.
    #[error("configuration error: {0}")]
    Config(String),

    /// The adaptive stepper could not make progress.
    #[error("step size underflow at t={t} (x1={x1}, x2={x2})")]
    StepSizeUnderflow { t: f64, x1: f64, x2: f64 },

    /// A precondition of a numerical operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The Stribeck divergence formula was evaluated at its pole.
    #[error("divergence pole: 1 - eps*gamma*(x2 - V) vanishes at x2={x2}")]
    DivergencePole { x2: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Invalid-input helper.
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to input validation).
    /// The CLI maps these to exit code 3, everything else to 2.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. } | Error::DivergencePole { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
