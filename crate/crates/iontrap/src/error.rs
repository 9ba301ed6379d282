use thiserror::Error;

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical diagnostic: invariant `{invariant}` failed: {detail}")]
    Numerical { invariant: String, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io(_) => 1,
        }
    }

    pub fn numerical(invariant: &str, detail: impl Into<String>) -> Self {
        RunError::Numerical {
            invariant: invariant.to_string(),
            detail: detail.into(),
        }
    }

    /// Parameter-level failures of the core are the caller's configuration.
    pub fn from_params(e: iontrap_core::Error) -> Self {
        RunError::Config(e.to_string())
    }

    /// Core failures during a computation; parameter and regime problems are
    /// reported as configuration errors, the rest as diagnostics.
    pub fn from_core(invariant: &str, e: iontrap_core::Error) -> Self {
        use iontrap_core::Error as E;
        match e {
            E::InvalidParams(_)
            | E::ZeroRabi
            | E::NotResonant(_)
            | E::RegimeMismatch(_)
            | E::InvalidSpace { .. }
            | E::InvalidArgument(_) => RunError::Config(e.to_string()),
            E::AmbiguousClustering { .. } => RunError::numerical("cluster separation", e.to_string()),
            E::OverlapAmbiguity { .. } => RunError::numerical("eigenstate pairing", e.to_string()),
            E::InvalidFit(_) => RunError::numerical("fit conclusiveness", e.to_string()),
            _ => RunError::numerical(invariant, e.to_string()),
        }
    }
}
