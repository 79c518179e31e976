use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("singular density: boundary distance {distance:e} at or below clip {clip:e}")]
    SingularDensity { distance: f64, clip: f64 },

    #[error("point lies on or outside the boundary (d = {0:e})")]
    PointOnBoundary(f64),

    #[error("domain sample is empty")]
    EmptyDomainSample,

    #[error("domain sample is disconnected: component sizes {0:?}")]
    DisconnectedSample(Vec<usize>),

    #[error("target unreachable in the metric graph")]
    Unreachable,

    #[error("shortest path touches the truncation shell of the bounding box")]
    TruncationSuspect,

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("too few points: need at least {need}, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("map leaves the domain at {0:?}")]
    MapLeavesDomain(Vec<f64>),

    #[error("coincident points")]
    CoincidentPoints,

    #[error("empty set")]
    EmptySet,

    #[error("set is unbounded")]
    UnboundedSet,

    #[error("radius {radius} exceeds the admissible bound {bound}")]
    RadiusTooLarge { radius: f64, bound: f64 },

    #[error("empty boundary shell")]
    EmptyShell,

    #[error("empty cluster")]
    EmptyCluster,

    #[error("invalid epsilon {epsilon}: must lie in (0, {bound})")]
    InvalidEpsilon { epsilon: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid metric space: {0}")]
    InvalidMetricSpace(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
