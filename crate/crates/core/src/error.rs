use thiserror::Error;

/// Which structural check a projector candidate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorCheck {
    Hermitian,
    Idempotent,
    IntegerTrace,
}

impl std::fmt::Display for ProjectorCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProjectorCheck::Hermitian => "hermiticity",
            ProjectorCheck::Idempotent => "idempotence",
            ProjectorCheck::IntegerTrace => "integer trace",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("party index {party} out of range for {parties} tensor factors")]
    InvalidParty { party: usize, parties: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("not a projector: {check} check failed (deviation {deviation:.3e})")]
    NotProjector { check: ProjectorCheck, deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("constraint `{name}` violated: {detail}")]
    Constraint { name: &'static str, detail: String },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("malformed operator file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
