//! Errors for the scalar and state-vector layer.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch { left: String, right: String },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    /// The requested exact operation leaves the (mag², phase-turn)
    /// representation; callers may retry in float mode.
    #[error("not exactly representable: {0}")]
    ExactClosure(String),
    #[error("invalid amplitude: {0}")]
    InvalidAmplitude(String),
    #[error("exact and float amplitudes cannot be mixed")]
    MixedMode,
    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),
}
