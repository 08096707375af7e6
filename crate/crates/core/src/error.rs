use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("field of size {size} exceeds the enumeration cap {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("normal form escaped the degree bound: {0}")]
    ReductionEscape(String),
    #[error("eigenvalues stayed degenerate after all redraws")]
    FailDegenerate,
    #[error("characteristic polynomial does not split in the working extension")]
    RootOutsideExtension,
    #[error("matrices do not commute")]
    NonCommuting,
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("SDP error: {0}")]
    Sdp(String),
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
