use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid pair at index {index}: {reason}")]
    InvalidPair { index: usize, reason: String },

    #[error("sample is empty")]
    EmptySample,

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sample fraction k={k} out of range for n={n}: {reason}")]
    FractionOutOfRange { k: usize, n: usize, reason: &'static str },

    #[error("degenerate configuration at k={k}: Hill estimates gamma={gamma_hat}, gamma2={gamma2_hat} (need gamma2 > gamma)")]
    Degenerate { k: usize, gamma_hat: f64, gamma2_hat: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("estimated asymptotic variance is negative ({0})")]
    NegativeVariance(f64),

    #[error("infinite-mean model: tail index {0} >= 1, premium undefined")]
    InfiniteMean(f64),

    #[error("retention {u} lies below the pivot X_(n-k:n) = {pivot}; only extrapolation is supported")]
    BelowPivot { u: f64, pivot: f64 },

    #[error("no admissible sample fraction: {0}")]
    SelectionFailed(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("{path}: line {line}: {reason}")]
    Parse { path: PathBuf, line: u64, reason: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Whether the failure comes from the estimator itself rather than from the input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::Degenerate { .. }
                | Error::DegenerateSample(_)
                | Error::NegativeVariance(_)
                | Error::SelectionFailed(_)
                | Error::InfiniteMean(_)
        )
    }
}
