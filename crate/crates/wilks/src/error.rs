use thiserror::Error;

/// Errors produced by model construction, bound evaluation, and the oracles.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("probability entries must be strictly positive")]
    NonPositiveProbability,
    #[error("probabilities must sum to 1 within 1e-12 (sum = {0})")]
    NotNormalized(f64),
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("symmetric eigendecomposition produced a non-positive eigenvalue ({0:e})")]
    EigenFailure(f64),
    #[error("empirical information matrix is singular: category {0} has zero count")]
    SingularEmpiricalInfo(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("corollary condition violated: Delta(n) >= a*(1 + delta_s)")]
    ConditionViolated,
    #[error("enumeration too large: {0:.3e} compositions exceeds the 1e7 cap")]
    TooLarge(f64),
    #[error("infeasible grid: {0}")]
    InfeasibleGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
