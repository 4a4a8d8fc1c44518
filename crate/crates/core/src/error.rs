use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum YfError {
    #[error("malformed token `{0}`")]
    MalformedToken(String),
    #[error("unit index {index} outside 1..={r}")]
    IndexOutOfRange { index: u32, r: u32 },
    #[error("invalid r = {0}; r must be at least 1")]
    InvalidR(u32),
    #[error("{what} = {value} out of range 0..={max}")]
    OutOfRange { what: &'static str, value: i64, max: i64 },
    #[error("words carry different r ({0} and {1})")]
    MismatchedR(u32, u32),
    #[error("expected an integer count, got {0}")]
    NotAnInteger(String),
    #[error("bad boundary vertex spec: {0}")]
    BoundarySpec(String),
    #[error("beta = {0} outside (0, 1]")]
    InvalidBeta(String),
    #[error("tolerance {0} must be positive")]
    InvalidTolerance(f64),
    #[error("boundary vertex has pi = 0; use the Plancherel measure instead")]
    ZeroPi,
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("output failed: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, YfError>;
