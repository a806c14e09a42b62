use thiserror::Error;

/// Errors produced by the estimation, engineering and compilation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("differential entropy undefined for this prior")]
    EntropyUndefined,

    #[error("Fisher information undefined: density is not differentiable")]
    FisherUndefined,

    #[error("posterior update has zero evidence (degenerate outcome)")]
    ZeroEvidence,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("averaged pair is infeasible: right-hand side leaves the support of gamma")]
    InfeasiblePair,

    #[error("closed-form qubit solution is singular: |characteristic function| = 1")]
    SingularDenominator,

    #[error("spectrum is infeasible: |lambda| = {0} exceeds 1")]
    InfeasibleSpectrum(f64),

    #[error("coefficients must be nonnegative (got {0})")]
    NegativeCoefficient(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("swap pairs overlap: level {0} used twice")]
    OverlappingSwapPairs(usize),

    #[error("freeze time {t_star} exceeds evaluation time {t}")]
    FreezeAfterEnd { t_star: f64, t: f64 },

    #[error("step count {0} exceeds the supported maximum {1}")]
    TooManySteps(usize, usize),

    #[error("objective is flat: probe state carries no information")]
    FlatObjective,

    #[error("pulse would move population past the motional cutoff (level {0})")]
    MotionalOverflow(usize),

    #[error("pulse index out of range: {0}")]
    PulseOutOfRange(usize),

    #[error("optimizer failed: {0}")]
    OptimizerFailure(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
