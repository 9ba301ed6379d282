use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid space: n_max={n_max}, interior_margin={margin} ({reason})")]
    InvalidSpace {
        n_max: usize,
        margin: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator has non-finite entries")]
    NonFinite,

    #[error("operator is not hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Rabi frequency must be nonzero for this operation")]
    ZeroRabi,

    #[error("closed form requires the resonance condition ({0})")]
    NotResonant(&'static str),

    #[error("regime does not match the parameters: {0}")]
    RegimeMismatch(String),

    #[error("ambiguous eigenvalue clustering: gap {gap:e} lies in ({eps:e}, {}]", 3.0 * eps)]
    AmbiguousClustering { gap: f64, eps: f64 },

    #[error("fit rejected: {0}")]
    InvalidFit(String),

    #[error("eigenstate pairing ambiguous: overlap {overlap:.3} below {threshold}")]
    OverlapAmbiguity { overlap: f64, threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
