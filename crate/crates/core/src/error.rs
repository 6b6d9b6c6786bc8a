use thiserror::Error;

/// Errors raised by the bandit library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a probability in [0, 1]")]
    InvalidProbability(f64),

    #[error("{0} is not a non-negative extended real")]
    InvalidExtReal(f64),

    #[error("arm {arm} out of range for an instance with {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("reward {0} is not binary")]
    NonBinaryReward(u8),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("statistics of an empty sample are undefined")]
    EmptySample,

    #[error("bound ratio is undefined: both coefficients are zero")]
    UndefinedRatio,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
