use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no global solution (M_AB = 0)")]
    NoGlobalSolution,

    #[error("locally unsatisfiable: subset {subset} has no solution")]
    LocallyUnsatisfiable { subset: char },

    #[error("instance too large for exhaustive census: {what} = {value} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error(
        "integrator step too coarse: norm drift {drift:.3e}, try at least {suggested_steps} steps"
    )]
    IntegratorTooCoarse { drift: f64, suggested_steps: u64 },

    #[error("instance format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Errors caused by the caller's inputs, as opposed to I/O or numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Format(_)
                | Error::NoGlobalSolution
                | Error::LocallyUnsatisfiable { .. }
        )
    }
}
