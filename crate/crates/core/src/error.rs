use thiserror::Error;

use crate::dynamics::Frame;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state is in the {found:?} frame, expected {expected:?}")]
    FrameMismatch { expected: Frame, found: Frame },

    #[error("noise variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("no coexistence regime: saddle radicands are not positive (tau12 = {tau12}, a = {a}, b = {b})")]
    NoCoexistence { tau12: f64, a: f64, b: f64 },

    #[error("degenerate isotropic coupling a = b makes the saddle potential singular")]
    DegenerateCoupling,

    #[error(
        "unstable manifold of the saddle did not reach the requested fixed point on either branch"
    )]
    WrongBranch,

    #[error(
        "reduced potential is not monotone along the path (first violation at vertex {index})"
    )]
    NonMonotonePath { index: usize },

    #[error("fixed point and saddle coincide; boundary is undefined")]
    DegenerateBoundary,

    #[error("start state lies outside the absorbing boundary")]
    StartOutside,

    #[error("noise variance {epsilon} too small: kernel system is numerically singular")]
    EpsilonTooSmall { epsilon: f64 },

    #[error("reduced potential curvature at the fixed point is {0}, not a minimum")]
    NotAMinimum(f64),

    #[error("regression needs at least 3 usable points, got {0}")]
    TooFewPoints(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
