use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid scale {0}: must be positive and finite")]
    InvalidScale(f64),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid soup spec: {0}")]
    InvalidSpec(String),

    #[error("pitch {pitch} is coarser than eps/4 = {limit}")]
    Resolution { pitch: f64, limit: f64 },

    #[error("invalid `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sequential exploration exceeded {0} iterations")]
    CapExceeded(usize),

    #[error("{truncated} of {total} gamma-star samples touched the window; widen the window")]
    WidenWindow { truncated: usize, total: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}
