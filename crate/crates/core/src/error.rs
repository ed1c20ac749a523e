use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {alpha} strength parameters for {centers} centers")]
    LengthMismatch { alpha: usize, centers: usize },

    #[error("strength tuple contains infinite entries; reduce it first")]
    UnreducedTuple,

    #[error("centers {0} and {1} coincide (distance below tolerance)")]
    CoincidingCenters(usize, usize),

    #[error("non-finite coordinate in center {0}")]
    NonFiniteCoordinate(usize),

    #[error("Green kernel evaluated at the origin")]
    ZeroVector,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("permutation expansion supports at most {max} centers, got {got}")]
    TooManyCenters { got: usize, max: usize },

    #[error("exponential polynomial has no nonzero delays (single center)")]
    NoDelays,

    #[error("matrix is singular at z = {0}")]
    Singular(num_complex::Complex64),

    #[error("zero of the function on the contour near {0}")]
    ZeroOnBoundary(num_complex::Complex64),

    #[error("winding accumulation {0} is not an integer")]
    NonIntegerWinding(f64),

    #[error("invalid search window: {0}")]
    InvalidWindow(String),

    #[error("{0} boxes could not be resolved within the subdivision depth")]
    Unresolved(usize),

    #[error("k = {0} is not a root (residual {1:e})")]
    NotARoot(num_complex::Complex64, f64),

    #[error("iteration did not converge after {0} steps")]
    NonConvergence(usize),

    #[error("stationary but not ray-aligned (minor sign check failed)")]
    NotRayAligned,

    #[error("frequency {0} is not achievable")]
    Unachievable(f64),

    #[error("vanishing {order}-th derivative; perturbation law is degenerate")]
    DegenerateDerivative { order: usize },

    #[error("strength parameter {0} is zero at an infinite base entry; outside the chart")]
    OutsideChart(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
