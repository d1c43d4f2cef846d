//! Error type shared by the whole core crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two vectors or sample sets disagree on feature dimension.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An input coordinate is NaN or infinite.
    #[error("non-finite input value")]
    NonFiniteInput,

    /// A kernel evaluation produced a NaN or infinite Gram entry.
    #[error("non-finite kernel value in Gram matrix")]
    NonFiniteKernel,

    /// Gaussian RBF bandwidth must be a positive finite real.
    #[error("invalid bandwidth: {0} (must be positive and finite)")]
    InvalidBandwidth(f64),

    /// A sample set has fewer rows than the operation requires.
    #[error("sample too small: {found} rows, need at least {required}")]
    SampleTooSmall { found: usize, required: usize },

    /// An estimator that requires equal sample sizes got unequal ones.
    #[error("sample sizes must be equal: got {m}, {n}, {r}")]
    UnequalSampleSizes { m: usize, n: usize, r: usize },

    /// Every cross-pair distance is zero, so no bandwidth can be selected.
    #[error("all cross-pair distances are zero; median heuristic undefined")]
    DegenerateDistances,

    /// Significance level outside (0, 1).
    #[error("invalid significance level alpha = {0} (must be in (0, 1))")]
    InvalidAlpha(f64),

    /// A sample set with no rows or no columns.
    #[error("empty sample set")]
    EmptySample,
}

pub type Result<T> = core::result::Result<T, Error>;
