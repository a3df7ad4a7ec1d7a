use thiserror::Error;

/// Errors produced by basis construction, likelihood evaluation, fitting and
/// simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient vector violates constraints {violated:?}")]
    Infeasible { violated: Vec<usize> },

    #[error("non-finite log-likelihood: observation {index} has probability {probability:e}")]
    NonFiniteLikelihood { index: usize, probability: f64 },

    #[error("observation {index} has zero probability for every feasible coefficient vector")]
    DegenerateData { index: usize },

    #[error("reduced system is singular for active set {active:?}")]
    SingularActiveSet { active: Vec<usize> },

    #[error("all {reps} Monte-Carlo replications failed")]
    AllReplicationsFailed { reps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
