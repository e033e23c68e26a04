use std::fmt;

use crate::UserId;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix input contained NaN/Inf, had mismatched dimensions, or was
    /// asymmetric where symmetry is required.
    InvalidMatrix(String),
    /// Chi-square degrees of freedom was zero.
    InvalidDegreesOfFreedom,
    /// Negative noncentrality parameter.
    InvalidNoncentrality,
    /// Probability argument outside (0, 1).
    InvalidProbability,
    /// Sliding-window size was zero.
    InvalidWindow,
    /// Observation rejected: non-finite entries or context norm above 1.
    InvalidObservation(String),
    /// Operation requires a nonempty dataset.
    EmptyDataset,
    /// One-sample test against a zero context vector.
    DegenerateObservation,
    /// Parameter gap must be strictly positive.
    InvalidGap,
    /// Arm selection requires at least one candidate.
    NoCandidates,
    /// No model/state for this user.
    UnknownUser(UserId),
    /// Aggregation over an empty neighborhood.
    EmptyNeighborhood,
    /// Oracle routing to a parameter index outside the pool.
    UnknownParameter(usize),
    /// Rejection sampling could not place separated parameters in budget.
    InfeasibleSeparation,
    /// Step index outside the environment horizon.
    OutOfHorizon { t: usize, horizon: usize },
    /// Malformed replay log row.
    Parse { line: usize, msg: String },
    /// Invalid experiment configuration; the message names the field path.
    Config(String),
    /// Requested feature or learner is not provided.
    Unsupported(String),
    /// I/O failure with the offending path.
    Io { path: String, msg: String },
    /// Invariant breakage inside the library.
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMatrix(msg) => write!(f, "invalid matrix: {msg}"),
            Error::InvalidDegreesOfFreedom => write!(f, "degrees of freedom must be at least 1"),
            Error::InvalidNoncentrality => write!(f, "noncentrality must be nonnegative"),
            Error::InvalidProbability => write!(f, "probability must lie strictly inside (0, 1)"),
            Error::InvalidWindow => write!(f, "window size must be at least 1"),
            Error::InvalidObservation(msg) => write!(f, "invalid observation: {msg}"),
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::DegenerateObservation => write!(f, "context vector is zero"),
            Error::InvalidGap => write!(f, "parameter gap must be positive"),
            Error::NoCandidates => write!(f, "candidate list is empty"),
            Error::UnknownUser(u) => write!(f, "unknown user {u}"),
            Error::EmptyNeighborhood => write!(f, "neighborhood is empty"),
            Error::UnknownParameter(k) => write!(f, "unknown parameter index {k}"),
            Error::InfeasibleSeparation => {
                write!(
                    f,
                    "could not sample separated parameters within the attempt budget"
                )
            }
            Error::OutOfHorizon { t, horizon } => {
                write!(f, "step {t} outside horizon 1..={horizon}")
            }
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
            Error::Io { path, msg } => write!(f, "io error on {path}: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
