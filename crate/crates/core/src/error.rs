use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leading principal minor {index} vanishes (|minor| = {value:e})")]
    NotInG0 { index: usize, value: f64 },
    #[error("word {0:?} is not reduced")]
    NonReducedWord(Vec<usize>),
    #[error("exponent coefficient {0} is negative")]
    NegativeCoefficient(i64),
    #[error("exterior level {level} out of range for n = {n}")]
    LevelOutOfRange { level: usize, n: usize },
    #[error("fundamental index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("minor routes disagree: lifts {lifted}, submatrix {direct}")]
    MinorMismatch { lifted: String, direct: String },
    #[error("value outside double range: {0}")]
    RangeExceeded(String),
    #[error("Cholesky failed: {0}")]
    CholeskyFailure(String),
    #[error("scale parameter s must be nonzero")]
    ZeroScale,
    #[error("degenerate spectrum (gap {gap:e})")]
    DegenerateSpectrum { gap: f64 },
    #[error("point is off the double Bruhat cell: minor {index} = {value:e}")]
    OffCell { index: i32, value: f64 },
    #[error("Newton iteration diverged after {iterations} steps (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("box sign check failed on face {face} ({side})")]
    BoxCheckFailed { face: usize, side: &'static str },
    #[error("finite-difference step underflow: {0}")]
    StepUnderflow(String),
    #[error("unsupported rank n = {0}")]
    UnsupportedRank(usize),
    #[error("empty region: {0}")]
    EmptyRegion(String),
    #[error("chart boundary: point is a torus-fixed pole")]
    PoleSingular,
    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("series value {value:e} at s = {s} is not positive")]
    NonPositiveValue { s: f64, value: f64 },
    #[error("sample rejected: {0}")]
    SampleRejected(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
