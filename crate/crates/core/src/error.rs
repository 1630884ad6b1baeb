use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter violates its domain invariant.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// Every eigenvalue of the transition matrix fell below the positivity threshold.
    #[error("matrix not positive: increase N_c or check action ({dropped} eigenvalues dropped)")]
    NotPositive { dropped: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})\n{dump}")]
    NoConvergence {
        sweeps: usize,
        off_norm: f64,
        dump: String,
    },

    #[error("config error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config { .. } => 2,
            Error::NotPositive { .. } | Error::NoConvergence { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}
