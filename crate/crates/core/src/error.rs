use alloc::string::String;

use crate::model::AlphabetSet;

/// Errors raised by the probability model, objectives and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two objects were built over different alphabets.
    #[error("alphabet mismatch in {set} labels")]
    AlphabetMismatch { set: AlphabetSet },

    /// Malformed construction input (bad labels, bad shape, bad parameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// A probability vector failed its simplex invariant.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Conditioning on an event of probability zero.
    #[error("undefined conditional: P({event}) = 0")]
    UndefinedConditional { event: String },

    /// A caller asked for something the API does not accept (empty variable set, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A utility fell outside the admissible domain of a transform.
    #[error("domain error: {phi} is undefined at utility {value}{}", group_suffix(.group))]
    Domain {
        phi: String,
        value: f64,
        group: Option<String>,
    },

    /// The requested measure or transform is not defined for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The numerical method failed to produce an answer.
    #[error("solver error: {message} (iterations {iterations}, pivots {pivots})")]
    Solver {
        message: String,
        iterations: usize,
        pivots: usize,
    },

    /// Exhaustive enumeration would exceed the evaluation cap.
    #[error(
        "grid of {requested} policies exceeds the cap of {cap} evaluations; use a smaller instance or a coarser grid"
    )]
    Capacity { requested: u128, cap: u64 },

    /// A result contradicted an analytical guarantee; signals a bug upstream.
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
}

fn group_suffix(group: &Option<String>) -> String {
    match group {
        Some(g) => alloc::format!(" (group {g})"),
        None => String::new(),
    }
}

impl Error {
    /// True for failures of a numerical method rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver { .. } | Error::InternalConsistency(_) | Error::Capacity { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
