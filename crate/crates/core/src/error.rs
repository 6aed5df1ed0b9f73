use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure a phaseflow computation can report.
///
/// Each variant has a stable name (see [`Error::code`]) that the command-line
/// driver prints alongside the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("axis {axis}: min ({min}) must be below max ({max})")]
    InvalidExtent { axis: usize, min: f64, max: f64 },

    #[error("axis {axis}: {count} points is too coarse, need at least {minimum}")]
    TooCoarse {
        axis: usize,
        count: usize,
        minimum: usize,
    },

    #[error("boundary mass fraction {mass:.3e} exceeds the allowed {limit:.3e}; enlarge the grid")]
    GridTooSmall { mass: f64, limit: f64 },

    #[error("wavepacket width {sigma} is under-resolved by grid spacing {dx} (need sigma >= 2 dx)")]
    QuadratureUnderresolved { sigma: f64, dx: f64 },

    #[error("Hermite degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("point ({q:?}, {p:?}) is a stationary point of H, the timescale T is infinite")]
    StationaryPoint { q: Vec<f64>, p: Vec<f64> },

    #[error("relative energy drift {drift:.3e} exceeds tolerance {tol:.3e}; reduce dt")]
    EnergyDrift { drift: f64, tol: f64 },

    #[error("trajectory too coarsely sampled: {reason}")]
    TooFewSamples { reason: String },

    #[error("fields are sampled on different grids")]
    GridMismatch,

    #[error("characteristics leave the grid: {detail}")]
    OutflowDetected { detail: String },

    #[error("every point is below the amplitude floor {floor:.3e}")]
    AllMasked { floor: f64 },

    #[error("no closed orbit found at energy {energy} within {max_time} time units")]
    NoClosedOrbit { energy: f64, max_time: f64 },

    #[error("energy {energy} is below the potential minimum {minimum}")]
    EnergyBelowMinimum { energy: f64, minimum: f64 },

    #[error("target action {target} is not bracketed up to energy {upper}")]
    RootNotBracketed { target: f64, upper: f64 },

    #[error("classical orbit at energy {energy} leaves the phase grid")]
    OrbitOutsideGrid { energy: f64 },

    #[error("amplitude {amplitude:.3e} on the orbit is below the floor {floor:.3e}")]
    AmplitudeZeroOnOrbit { amplitude: f64, floor: f64 },

    #[error("coordinate transform Jacobian is singular at q = {q:?}")]
    SingularJacobian { q: Vec<f64> },

    #[error("discretization error estimate {estimate:.3e} exceeds {limit:.3e}; refine or enlarge the grid")]
    GridTooCoarse { estimate: f64, limit: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("model {model} does not support {operation}")]
    UnsupportedModel {
        model: &'static str,
        operation: &'static str,
    },
}

impl Error {
    /// Stable identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidExtent { .. } => "InvalidExtent",
            Error::TooCoarse { .. } => "TooCoarse",
            Error::GridTooSmall { .. } => "GridTooSmall",
            Error::QuadratureUnderresolved { .. } => "QuadratureUnderresolved",
            Error::DegreeTooHigh { .. } => "DegreeTooHigh",
            Error::StationaryPoint { .. } => "StationaryPoint",
            Error::EnergyDrift { .. } => "EnergyDrift",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::GridMismatch => "GridMismatch",
            Error::OutflowDetected { .. } => "OutflowDetected",
            Error::AllMasked { .. } => "AllMasked",
            Error::NoClosedOrbit { .. } => "NoClosedOrbit",
            Error::EnergyBelowMinimum { .. } => "EnergyBelowMinimum",
            Error::RootNotBracketed { .. } => "RootNotBracketed",
            Error::OrbitOutsideGrid { .. } => "OrbitOutsideGrid",
            Error::AmplitudeZeroOnOrbit { .. } => "AmplitudeZeroOnOrbit",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::UnsupportedModel { .. } => "UnsupportedModel",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
