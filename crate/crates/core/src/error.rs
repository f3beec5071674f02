//! Error type shared across the crate.

/// Errors produced by sampling, classification, training, and report code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The exact binomial coefficient does not fit in a `u64`.
    #[error("binomial({t}, {n}) overflows u64")]
    BinomialOverflow { t: u64, n: u64 },

    /// Brute-force enumeration would exceed the configured subset budget.
    #[error("enumeration budget exceeded: C({t}, {n}) = {subsets} subsets > budget {budget}")]
    EnumerationBudget {
        t: usize,
        n: usize,
        subsets: u64,
        budget: u64,
    },

    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}, lr {learning_rate}")]
    TrainingDiverged {
        epoch: usize,
        batch: usize,
        learning_rate: f64,
    },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that mean "the combinatorial search space is too large",
    /// as opposed to a malformed input. Grid runners skip such cells instead of
    /// aborting.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            Error::BinomialOverflow { .. } | Error::EnumerationBudget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
