//! Error types shared across the crate.
//!
//! Two enums cover the two failure families: [`ConfigError`] for anything wrong
//! with user-supplied scenario input (parse or validation), and [`SimError`]
//! for runtime failures of the numerical model itself. The CLI maps these onto
//! distinct process exit codes so scripted sweeps can tell them apart.

use thiserror::Error;

/// Problems with a scenario description: unreadable syntax or values that
/// violate the model's physical preconditions.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// The config text could not be parsed. Carries the 1-based line number
    /// and the offending key or token so the user can find it.
    #[error("malformed config at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    /// A parsed value violates a model precondition. Names the field.
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl ConfigError {
    pub fn validation(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn malformed(line: usize, reason: impl Into<String>) -> Self {
        ConfigError::Malformed {
            line,
            reason: reason.into(),
        }
    }
}

/// Runtime failures of the numerical model.
#[derive(Debug, Error)]
pub enum SimError {
    /// A root solve did not converge. Carries the simulation time, the buoyant
    /// mass deficit in effect, and the last bracketing interval.
    #[error(
        "displacement solve failed to converge at t = {t} s (Z = {z} kg, \
         last bracket [{bracket_lo}, {bracket_hi}])"
    )]
    NumericalFailure {
        t: f64,
        z: f64,
        bracket_lo: f64,
        bracket_hi: f64,
    },

    /// A Reynolds number left the range covered by the drag model.
    #[error("Reynolds number {re} outside the supported drag regimes (0, 2e5]")]
    OutOfRegime { re: f64 },

    /// An expression requires a strictly positive cloud displacement.
    #[error("singular geometry in {context}: cloud displacement is zero")]
    SingularGeometry { context: &'static str },

    /// The monotone displacement series went backwards — a solver or caller bug.
    #[error("invalid step: displacement decreased from {prev} m to {next} m")]
    InvalidStep { prev: f64, next: f64 },

    /// A zero-variance received-count distribution was asked for a density at
    /// its point mass; there is no finite density to report.
    #[error("degenerate received-count distribution: all mass at {mean}")]
    DegenerateDistribution { mean: f64 },

    /// Too many ensemble members failed to produce statistics worth reporting.
    #[error("{failed} of {total} ensemble runs failed (tolerated at most 1%): {first_error}")]
    EnsembleFailure {
        failed: usize,
        total: usize,
        first_error: String,
    },

    /// A sweep was asked for with an unusable grid.
    #[error("invalid sweep grid for `{param}`: {reason}")]
    InvalidGrid { param: String, reason: String },

    #[error(transparent)]
    Config(#[from] ConfigError),
}
