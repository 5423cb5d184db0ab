use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum VoteError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A base learner failed while fitting one ensemble member.
    #[error("base learner failed on subsample {ballot}: {message}")]
    LearnerFailure { ballot: usize, message: String },

    /// A loss oracle produced a NaN or infinity.
    #[error("non-finite loss for model {model_index} at data index {data_index}")]
    NonFiniteLoss {
        model_index: usize,
        data_index: usize,
    },

    #[error("combinatorial budget exceeded: C({n}, {k}) > {budget}")]
    CombinatorialBudget { n: usize, k: usize, budget: u64 },

    #[error("missing cell: method {method} at n = {n}")]
    MissingCell { method: String, n: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure reported by a base learner; carried back with the ballot index.
#[derive(Debug, Clone)]
pub struct LearnFailure {
    pub message: String,
}

impl LearnFailure {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, VoteError>;
