use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Probability mass beyond the last retained Fock level exceeds the allowed bound.
    #[error("truncation too small: tail mass {tail:.3e} beyond dimension {dim} exceeds {bound:.1e}")]
    TruncationTooSmall { tail: f64, dim: usize, bound: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("phase-space grid too small: {0}")]
    GridTooSmall(String),

    #[error("phase-space grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("p = {p} lies outside the grid range [{p_min}, {p_max}]")]
    OutOfGrid { p: f64, p_min: f64, p_max: f64 },

    #[error("retained Kraus terms lose {lost:.3e} of the trace (cutoff {cutoff})")]
    KrausCutoffTooSmall { lost: f64, cutoff: usize },

    #[error("negativity stays above {epsilon:.1e} up to gamma_t = {upper}")]
    NoThresholdInRange { epsilon: f64, upper: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
