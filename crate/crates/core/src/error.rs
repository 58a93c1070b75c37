use thiserror::Error;

/// Errors raised while building or analysing piecewise objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid piecewise function: {0}")]
    InvalidPiecewise(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("function has a non-vanishing left tail and cannot be integrated from -inf")]
    NonIntegrableTail,
    #[error("weight function vanishes at x = {x} where the integrand is positive")]
    DivisionByZeroGamma { x: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("weights do not match components: {0}")]
    WeightMismatch(String),
    #[error("function is not non-decreasing near x = {x}")]
    NotMonotone { x: f64 },
    #[error("value {value} at x = {x} is outside the admissible range")]
    RangeViolation { x: f64, value: f64 },
    #[error("pair is not second-order ordered: ratio A-/A+ reaches {ratio} at t = {t}")]
    NotSSDOrdered { t: f64, ratio: f64 },
    #[error("constant gamma {0} is outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("constant epsilon {0} is outside (0, 1/2)")]
    EpsilonOutOfRange(f64),
    #[error("gamma is not constant on the negative region [{from}, {to})")]
    NonStepGammaOnNegativeRegion { from: f64, to: f64 },
    #[error("epsilon is not constant on the negative region [{from}, {to})")]
    NonStepEpsilonOnNegativeRegion { from: f64, to: f64 },
    #[error("utility has a non-positive slope on segment {segment}")]
    NonPositiveSlope { segment: usize },
    #[error("parameter violation: {0}")]
    ParameterViolation(String),
    #[error("no rational number with the required size in ({lo}, {hi})")]
    NoValidRational { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
