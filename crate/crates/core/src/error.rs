use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Resolution,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} components, got {got}")]
    ComponentMismatch { expected: usize, got: usize },

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("unresolvable configuration: {0}")]
    Unresolvable(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::AxisOutOfRange { .. }
            | Error::ComponentMismatch { .. }
            | Error::GridMismatch => ErrorClass::Config,
            Error::Unresolvable(_) | Error::ResourceLimit(_) => ErrorClass::Resolution,
            Error::NonFinite(_)
            | Error::NegativeTime(_)
            | Error::StepRejected(_)
            | Error::MissingData(_) => ErrorClass::Numerical,
            Error::Format(_) | Error::Io(_) => ErrorClass::Io,
        }
    }
}
