use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precision {0} bits is below the 64-bit minimum")]
    PrecisionTooLow(u32),
    #[error("cannot parse {0:?} as a real number")]
    Parse(String),
    /// `index` is the 1-based sequence position, or 0 for a standalone map.
    #[error("coefficient {value} at index {index} is not positive")]
    NonPositiveCoefficient { index: usize, value: String },
    #[error("matrix determinant is not positive")]
    NonPositiveDeterminant,
    #[error("point is the boundary pole of the map")]
    PoleOnBoundary,
    #[error("derivative requested at the pole of the map")]
    PoleDerivative,
    #[error("map is not hyperbolic")]
    NotHyperbolic,
    #[error("parameter a = {0} is not in the elliptic range a > 1/4")]
    NotElliptic(String),
    #[error("value {0} is outside the admissible range")]
    OutOfRange(String),
    #[error("coefficient index {0} is beyond the end of a finite sequence")]
    IndexOutOfRange(usize),
    #[error("orbit of 0 under T_a does not close after q = {0} steps")]
    NotPeriodic(usize),
    #[error("repeller target lies in the orbit C_a")]
    RInOrbit,
    #[error("repeller target is exceptional for the lemma: {0}")]
    ExceptionalR(String),
    #[error("no admissible repeller target with the requested margin")]
    NoAdmissibleR,
    #[error("stage {0} is not hyperbolic")]
    StageNotHyperbolic(usize),
    #[error("multiplier slope {0} is degenerate")]
    DegenerateSlope(String),
    #[error("closed-form vector field disagrees with finite differences: {0}")]
    FieldMismatch(String),
    #[error("not enough continued-fraction convergents with q >= 3 (needed {needed}, found {found})")]
    NotEnoughConvergents { needed: usize, found: usize },
    #[error("power cap {cap} exceeded at stage {stage}; estimated power needed {estimate}")]
    PowerCapExceeded { stage: usize, cap: u64, estimate: u64 },
    #[error("Cauchy check failed at k = {k}, m = {m}: {detail}")]
    CauchyViolation { k: usize, m: usize, detail: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Scenario(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
