//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("log of zero")]
    LogOfZero,

    #[error("parameter must lie in the open upper half-plane (Im > 0), got {0}")]
    NotInUpperHalfPlane(String),

    #[error("parameter must lie in the open unit disk (|w| < 1), got {0}")]
    NotInUnitDisk(String),

    #[error("point must not lie below the real axis, got {0}")]
    BelowRealAxis(String),

    #[error("w = 1 is the pole of the inverse Möbius map")]
    InverseMapPole,

    #[error("point lies outside the closed unit disk: {0}")]
    OutsideClosedDisk(String),

    #[error("non-finite value in {context}: {value}")]
    NonFinite { context: &'static str, value: f64 },

    #[error("cannot parse complex literal {input:?}: {reason}")]
    ParseComplex { input: String, reason: &'static str },

    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("angle must lie in [0, 2*pi), got {0}")]
    AngleOutOfRange(f64),

    #[error("mixture components must be distinct")]
    MixtureIdenticalComponents,

    #[error("mixture weight must lie in (0, 1), got {0}")]
    MixtureWeightOutOfRange(f64),

    #[error("sample must contain at least one observation")]
    EmptySample,

    #[error("sample has {values} values but {weights} weights")]
    WeightLengthMismatch { values: usize, weights: usize },

    #[error("weights must be nonnegative, got {0}")]
    NegativeWeight(f64),

    #[error("weights must sum to 1 within 1e-12, got {0}")]
    WeightsNotNormalized(f64),

    #[error("sample count must be at least 1")]
    ZeroSampleCount,

    #[error("line {line}: cannot parse observation {content:?}")]
    CsvParse { line: usize, content: String },

    #[error("Mellin exponent real part must lie in {range}, got {re}")]
    ExponentOutOfRange { re: f64, range: &'static str },

    #[error("denominator expectation vanished (numerical degeneracy)")]
    DegenerateDenominator,

    #[error("angle exactly 0 in input: the circular characterization assumes P(X != 0) = 1")]
    ZeroAngle,

    #[error("zero value in sample: the log-moment characterization assumes P(X = 0) = 0")]
    ZeroValue,

    #[error("sample is a point mass; no interior estimate exists")]
    DegenerateSample,

    #[error("empirical Mellin transform is exactly zero; cannot invert the power")]
    MellinEmpiricalZero,

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    FixedPointDidNotConverge { iterations: usize, residual: f64 },

    #[error("test requires at least {need} {what}, got {got}")]
    TooFew {
        what: &'static str,
        need: usize,
        got: usize,
    },

    #[error("only {got} of {grid} grid exponents produced upper-half-plane estimates (need {need})")]
    GridCoverage { got: usize, need: usize, grid: usize },

    #[error("quadrature did not reach the requested tolerance {requested:.3e} (achieved {achieved:.3e})")]
    QuadratureNonConvergence { requested: f64, achieved: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
