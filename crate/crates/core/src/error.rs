use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("no relevant pairs: every group holds a single point")]
    NoRelevantPairs,

    /// `k'L̃k` fell below the configured minimum; the candidate cannot reduce the loss.
    #[error("degenerate candidate: curvature {curvature:e} below {threshold:e}")]
    DegenerateCandidate { curvature: f64, threshold: f64 },

    #[error("no usable candidate left in the dictionary")]
    CandidatesExhausted,

    #[error("linear system is singular even after jitter escalation")]
    SingularSystem,

    #[error("all paired differences are zero")]
    AllDifferencesZero,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: rating {value} outside the allowed range")]
    RatingOutOfRange { line: usize, value: f64 },

    #[error("line {line}: duplicate rating for user {user}, item {item}")]
    DuplicateRating { line: usize, user: u64, item: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by ill-conditioned numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCandidate { .. } | Error::CandidatesExhausted | Error::SingularSystem
        )
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
