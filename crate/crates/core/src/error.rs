use thiserror::Error;

use crate::oculomotor::Eye;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("point at infinity cannot be normalized")]
    PointAtInfinity,

    #[error("invalid gaze: {0}")]
    InvalidGaze(String),

    #[error("range rho = {rho} is below the minimum {min} (baseline units)")]
    RangeBelowMinimum { rho: f64, min: f64 },

    #[error("parallel visual axes: fixation at infinite range")]
    InfiniteRange,

    #[error("zero vergence: the Vieth-Mueller circle has infinite radius")]
    ZeroVergence,

    #[error("circle parameter theta = {0} lies on the backward arc")]
    BackwardArc(f64),

    #[error("epipolar line undefined: image point coincides with the epipole")]
    UndefinedEpipolarLine,

    #[error("Cyclopean ray passes through the {0} epipole")]
    DegenerateRay(Eye),

    #[error("scene point lies behind the {0} eye")]
    BehindEye(Eye),

    #[error("parallax corresponds to a point at infinite depth")]
    DepthAtInfinity,

    #[error("non-positive Cyclopean depth z_c = {0}")]
    NonPositiveDepth(f64),

    #[error("fixation plane passes through or behind the left eye")]
    PlaneBehindEye,

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),

    #[error("estimator did not converge after {} iterations", .0.iterations)]
    NotConverged(Box<crate::estimation::GazeEstimate>),
}
