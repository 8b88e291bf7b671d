use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot mix exact and inexact distances")]
    MixedModes,
    #[error("point outside the space: {0}")]
    OutsideUniverse(String),
    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },
    #[error("k = {k} out of range: need 1 <= k <= {available}")]
    KOutOfRange { k: usize, available: usize },
    #[error("radius must be nonnegative")]
    NegativeRadius,
    #[error("sample has no labels")]
    MissingLabels,
    #[error("{labels} labels for {points} points")]
    LabelLength { labels: usize, points: usize },
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("search budget exceeded: {needed} candidate tuples > cap {cap}; use sampling mode")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("schedule exceeds the size cap {cap} at level {level}")]
    SizeCap { level: usize, cap: u64 },
    #[error("regression function unavailable for this distribution")]
    NoRegressionFunction,
}

pub type Result<T> = std::result::Result<T, Error>;
