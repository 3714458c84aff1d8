use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] rankpursuit::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("every grid point failed to fit")]
    NoGridPoint,

    #[error("cannot compare: {0}")]
    NotComparable(String),

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if e.is_numerical() => 3,
            HarnessError::NoGridPoint => 3,
            HarnessError::Core(rankpursuit::Error::InvalidParameter(_)) | HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}
