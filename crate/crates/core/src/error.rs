use thiserror::Error;

/// Errors raised by the fitting, corner and I/O routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("two or more input points coincide")]
    DuplicatePoints,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("candidate center coincides with a data point")]
    CenterHitsPoint,
    #[error("biarc denominator vanishes")]
    DenominatorZero,
    #[error("tangent configuration admits no single biarc")]
    Inadmissible,
    #[error("biarc construction gives a non-positive beta ({0})")]
    NegativeBeta(f64),
    #[error("control points are collinear")]
    CollinearControls,
    #[error("control legs have unequal lengths")]
    UnequalLegs,
    #[error("parameter {t} outside [0, {n}]")]
    OutOfDomain { t: f64, n: usize },
    #[error("gap could not be filled")]
    GapUnfillable,
    #[error("smoothing biarc deviates more than the tolerance")]
    DeltaTooLarge,
    #[error("smoothing biarc is indistinguishable from the corner")]
    DeltaTooSmall,
    #[error("neighbouring piece is shorter than the trim distance")]
    NeighborTooShort,
    #[error("no fillet of the requested radius exists")]
    NoFilletExists,
    #[error("not enough points to grow the fit window")]
    InsufficientPoints,
    #[error("fitted curves do not intersect")]
    NoIntersection,
    #[error("sampling step too large for a piece of length {0}")]
    StepTooLarge(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: point repeats the previous one")]
    DuplicateConsecutive { line: usize },
    #[error("curve is not connected at piece {0}")]
    DisconnectedCurve(usize),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
