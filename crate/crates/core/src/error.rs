use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The distribution has (numerically) zero variance; callers treat it as a point mass.
    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("error covariance is singular and the quadratic form is not supported on its range")]
    SingularCovariance,

    #[error("channel estimates are ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("SINR target {gamma:.6e} is not feasible under the power budget")]
    InfeasibleTarget { gamma: f64 },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
