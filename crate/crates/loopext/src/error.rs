//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the verification library.
#[derive(Debug, Error)]
pub enum Error {
    /// A group element lies outside the principal-branch domain of the
    /// logarithm (rotation angle too close to pi).
    #[error("chart domain error: rotation angle {angle:.6} exceeds limit {limit:.6}")]
    ChartDomain { angle: f64, limit: f64 },

    /// Two sampled maps do not share the same grid.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// A quantity that should be an integer is not close enough to decide.
    #[error("degeneracy error: value {value:.6} is {distance:.6} away from the nearest integer")]
    Degeneracy { value: f64, distance: f64 },

    /// Calibration could not be completed.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// A point fails the declared cover-membership test.
    #[error("overlap error: {0}")]
    Overlap(String),

    /// A circle value is too far from 0 to lift unambiguously to the reals.
    #[error("branch error: circle value {value:.6} too far from 0 to lift")]
    Branch { value: f64 },

    /// A section handle does not project back to its argument.
    #[error("section error: {0}")]
    Section(String),

    /// Source/target mismatch when composing groupoid morphisms.
    #[error("composability error: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    Composability { defect: f64, tolerance: f64 },

    /// The band quotient is only defined for rational levels.
    #[error("irrational level error: k = {value} has no rational presentation")]
    IrrationalLevel { value: String },

    /// A fixture loop is not covered by any chart of the atlas.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Constructor rejected a malformed value.
    #[error("validation error: {0}")]
    Validation(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine tag used in failed check reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::ChartDomain { .. } => "chart_domain",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::Degeneracy { .. } => "degeneracy",
            Error::Calibration(_) => "calibration",
            Error::Overlap(_) => "overlap",
            Error::Branch { .. } => "branch",
            Error::Section(_) => "section",
            Error::Composability { .. } => "composability",
            Error::IrrationalLevel { .. } => "irrational_level",
            Error::Coverage(_) => "coverage",
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Io(_) => "io",
        }
    }
}
