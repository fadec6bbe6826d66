use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported Matrix Market field `{0}`")]
    UnsupportedField(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("symmetric part of the matrix is singular")]
    SingularSymmetricPart,
    #[error("{0}")]
    Core(#[from] gmres_forge_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl LabError {
    /// 2 for invalid input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(e) if !e.is_validation() => 3,
            LabError::SingularSymmetricPart | LabError::VerificationFailed(_) => 3,
            _ => 2,
        }
    }
}
