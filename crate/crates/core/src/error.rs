use thiserror::Error;

use crate::metrics::MetricId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("negative count for {field}: {value}")]
    NegativeCount { field: &'static str, value: i64 },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("{0} has no balanced form")]
    NoBalancedForm(MetricId),

    #[error("{0} has no contour form for the given parameters")]
    NoContourForm(MetricId),

    #[error("rate {name} = {value} is outside [0, 1]")]
    RateOutOfRange { name: &'static str, value: String },

    #[error("count {count} exceeds number of trials {trials}")]
    CountExceedsTrials { count: u64, trials: u64 },

    #[error("beta shape parameters must be positive (got {alpha}, {beta})")]
    NonPositiveShape { alpha: String, beta: String },

    #[error("binomial model needs observed positives and negatives (p1 = {p1}, n1 = {n1})")]
    EmpiricalRateUndefined { p1: u64, n1: u64 },

    #[error("benefit matrix is constant and cannot be normalised")]
    ConstantBenefits,

    #[error("scale for {metric} is degenerate at p = {p}, n = {n}")]
    DegenerateScale { metric: MetricId, p: u64, n: u64 },

    #[error("projection needs a non-empty matrix")]
    EmptyMatrix,

    #[error("precision-recall mapping needs at least one positive example")]
    NoPositives,

    #[error("invalid contour level: {0}")]
    InvalidLevel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("{trials} future trials exceed the limit of {limit}")]
    TooManyTrials { trials: u64, limit: u64 },

    #[error("all probability mass is on undefined metric values")]
    AllUndefined,

    #[error("pmf contains infinite or undefined values")]
    NonFiniteSupport,
}
