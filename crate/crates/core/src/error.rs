use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("point has r = {0}; the half plane requires r > 0")]
    InvalidPoint(f64),

    #[error("r = {r} lies outside the warp domain ({lo}, {hi})")]
    OutsideDomain { r: f64, lo: f64, hi: f64 },

    #[error("warp function has no positive domain: {0}")]
    EmptyDomain(String),

    #[error("warp function is not positive at r = {0}")]
    NonPositiveWarp(f64),

    #[error("tangent vectors are attached to different base points")]
    BaseMismatch,

    #[error("initial state is not unit speed: f^2 + g^2 = {0}")]
    NonUnitSpeed(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the two points coincide")]
    IdenticalPoints,

    #[error("no geodesic can exist: {0}")]
    ThresholdViolated(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
