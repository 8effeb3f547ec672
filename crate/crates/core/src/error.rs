use thiserror::Error;

use crate::model::ValidationError;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("negative density S = {0}")]
    NegativeDensity(f64),

    #[error("diffusivity {name} is zero but the system divides by it")]
    ZeroDiffusivity { name: &'static str },

    #[error("saturation denominator 1 + sigma*h vanishes (h = {h})")]
    SingularDenominator { h: f64 },

    #[error("operation requires sigma = 0, got sigma = {0}")]
    SigmaNotZero(f64),

    #[error("wave speed c = {c} is below the minimum speed {c_min}")]
    SpeedBelowBound { c: f64, c_min: f64 },

    #[error("slope r = {r} is outside (0, c = {c}]")]
    SlopeOutOfInterval { r: f64, c: f64 },

    #[error("point ({s}, {i}) is not strictly inside the trapping triangle")]
    OutsideTriangle { s: f64, i: f64 },

    #[error("epsilon = {0} is outside the admissible range for this operation")]
    BadEpsilon(f64),

    #[error("tolerance {0} is outside [1e-13, 1e-3]")]
    BadTolerance(f64),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("state has {got} coordinates, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("equilibrium is not a saddle: {unstable} unstable directions")]
    NotASaddle { unstable: usize },

    #[error("saddle index changed: expected 1 unstable direction, found {unstable}")]
    EigenstructureChanged { unstable: usize },

    #[error("no connection found ({reason}); escape state {escape:?} at z = {z}")]
    NoConnection { reason: String, escape: Vec<f64>, z: f64 },

    #[error("time step {dt} violates the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("field became non-finite at t = {t}")]
    NonFiniteField { t: f64 },

    #[error("front interface lost: {0}")]
    InterfaceLost(String),

    #[error("profiles do not overlap in the comparison window")]
    NoOverlap,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// `true` for errors caused by bad inputs rather than by a numerical
    /// procedure failing on valid inputs.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::NegativeDensity(_)
                | Error::SigmaNotZero(_)
                | Error::SpeedBelowBound { .. }
                | Error::SlopeOutOfInterval { .. }
                | Error::OutsideTriangle { .. }
                | Error::BadEpsilon(_)
                | Error::BadTolerance(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
