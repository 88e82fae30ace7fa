use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample index {index} out of range for {n_samples} samples")]
    IndexOutOfRange { index: usize, n_samples: usize },

    #[error("iterate has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty sample")]
    EmptySample,

    #[error("sample variance needs at least 2 samples, got {0}")]
    VarianceUndefined(usize),

    #[error("pivot direction has vanishing norm")]
    DegeneratePivot,

    #[error("gradient is zero")]
    ZeroGradient,

    #[error("running average needs {needed} gradients, have {have}")]
    NotReady { needed: usize, have: usize },

    #[error("sample size {m} exceeds population size {n}")]
    SampleTooLarge { m: usize, n: usize },

    #[error("line search failed after {backtracks} backtracks (last L = {last_l})")]
    LineSearchFailed { backtracks: usize, last_l: f64 },

    #[error("iterate diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("iteration cap of {0} exceeded")]
    IterationCap(usize),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
