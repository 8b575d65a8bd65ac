use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value")]
    NonFinite,
    #[error("vector too short to define a direction")]
    DegenerateDirection,
    #[error("direction nearly opposite the x axis (1 + cos = {0:e})")]
    NearAntipodal(f64),
    #[error("Hermite self-check failed: residual {residual:e} exceeds {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("curve speed vanishes at t = {0}")]
    DegenerateSpeed(f64),
    #[error("torsion undefined at t = {0} (curve locally straight)")]
    UndefinedTorsion(f64),
    #[error("normal undefined at t = {0} (curvature vanishes)")]
    UndefinedNormal(f64),
    #[error("point sets are collinear or coincident")]
    DegenerateGeometry,
    #[error("point set sizes differ: {reference} reference vs {current} current")]
    SizeMismatch { reference: usize, current: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("timestamp {current} precedes {previous}")]
    NonMonotonicTimestamp { previous: f64, current: f64 },
    #[error("pose stream needs at least two poses")]
    EmptyStream,
    #[error("timestamps not strictly increasing at index {index}")]
    NonMonotonicStream { index: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("no pose pairs associated within the time window")]
    NoAssociations,
    #[error("trajectory has no segments")]
    EmptyTrajectory,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
