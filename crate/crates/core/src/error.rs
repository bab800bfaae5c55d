use thiserror::Error;

/// Errors raised by the estimation, testing and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A stationary moment of this order does not exist.
    #[error("moment of order {order} diverges (requires order > {bound})")]
    MomentDomain { order: f64, bound: f64 },

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    /// Q_s is (numerically) singular over the requested window.
    #[error("singular window ending at s = {window_end}: det Q = {det_q:e}")]
    SingularWindow { window_end: f64, det_q: f64 },

    #[error("singular design in discrete least squares (det = {det:e})")]
    SingularDesign { det: f64 },

    #[error("matrix is not positive definite: {0}")]
    MatrixDomain(String),

    #[error(transparent)]
    Csv(#[from] CsvError),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Diagnostics for the `t,x` path file format. Line numbers are 1-based and
/// count the header.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsvError {
    #[error("missing or wrong header (expected `t,x`), found `{0}`")]
    Header(String),

    #[error("line {line}: malformed row: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("line {line}: non-uniform grid (step {step} vs expected {expected})")]
    NonUniformGrid { line: usize, step: f64, expected: f64 },

    #[error("line {line}: negative value x = {value}")]
    NegativeValue { line: usize, value: f64 },

    #[error("path needs at least two rows, found {0}")]
    TooShort(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
