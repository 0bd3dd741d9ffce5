use thiserror::Error;

use crate::modes::Theory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("undefined-at-origin: the sharp step has no value at x = 0, use a one-sided limit")]
    UndefinedAtOrigin,

    #[error("invalid-width: smoothing width must be positive and finite, got {0}")]
    InvalidWidth(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("below-threshold: {0}")]
    BelowThreshold(String),

    #[error("operation requires a {expected} mode, got {got}")]
    WrongTheory { expected: Theory, got: Theory },

    #[error("invalid matrix set: {0}")]
    InvalidMatrixSet(String),

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("no-convergence: {0}")]
    NoConvergence(String),

    #[error("unresolved-window: window {window} must exceed the smoothing width {epsilon}")]
    UnresolvedWindow { window: f64, epsilon: f64 },

    #[error("probe-inside-smoothing: probe offset {delta} must exceed 3 x smoothing width {epsilon}")]
    ProbeInsideSmoothing { delta: f64, epsilon: f64 },

    #[error("rejected: {0}")]
    Rejected(String),

    #[error("invalid packet: {0}")]
    InvalidPacket(String),

    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),

    #[error("box-too-small: wall amplitude {amplitude:.3e} exceeds 1e-6 at t = {time}")]
    BoxTooSmall { time: f64, amplitude: f64 },
}

impl Error {
    /// Configuration-type failures, as opposed to physics-domain ones.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::InvalidGrid(_)
                | Error::InvalidWidth(_)
                | Error::InvalidDomain(_)
                | Error::InvalidPacket(_)
                | Error::InvalidTimeStep(_)
                | Error::InvalidMatrixSet(_)
        )
    }
}
