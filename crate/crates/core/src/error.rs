use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid subsystem selection {keep:?} for dims {dims:?}")]
    InvalidSubsystems { keep: Vec<usize>, dims: Vec<usize> },
    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("state is not normalized (trace or norm {value})")]
    NotNormalized { value: f64 },
    #[error("frame is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("Kraus operators are not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },
    #[error("map is not Hermitian preserving (Choi deviation {deviation:e})")]
    NotHermitianPreserving { deviation: f64 },
    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded { what: String, needed: f64, cap: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown channel family `{0}`")]
    UnknownChannel(String),
    #[error("malformed channel spec `{spec}`: {reason}")]
    MalformedSpec { spec: String, reason: String },
    #[error("output of the channel on the prior is singular")]
    SingularOutput,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
