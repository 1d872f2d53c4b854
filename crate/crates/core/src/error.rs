use thiserror::Error;

/// Errors raised by the exact engine and the shot simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outcome has zero probability; post-measurement state is undefined")]
    OutcomeImpossible,

    #[error("probability {0} lies outside [0, 1] beyond round-off")]
    ProbabilityOutOfRange(f64),

    #[error("second-measurement outcome m={m} has q_m = 0 but nonzero conditional weight")]
    SingularSupport { m: usize },

    #[error("free energy is undefined at beta = 0")]
    UndefinedFreeEnergy,

    #[error("record does not cover cell (n={n}, m={m}) of the joint distribution")]
    InconsistentRecord { n: usize, m: usize },

    #[error("invalid counts: {0}")]
    InvalidCounts(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
