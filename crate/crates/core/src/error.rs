use thiserror::Error;

/// Errors surfaced by the library's contract checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{context}: input must not be empty")]
    EmptyInput { context: &'static str },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid weights: {reason}")]
    InvalidWeights { reason: String },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("objective {objective} has gradient norm below the floor; cannot normalise")]
    ZeroGradient { objective: usize },

    #[error("objective {objective} produced an empty preference dataset")]
    EmptyObjective { objective: usize },

    #[error("training aborted at step {step}: {source}")]
    TrainAbort {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the training step it occurred at.
    pub fn at_step(self, step: usize) -> Self {
        Error::TrainAbort {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
