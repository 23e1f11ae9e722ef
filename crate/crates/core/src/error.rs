use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("evaluation error in component {component}: {message}")]
    Eval { component: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("derivative of order {requested} exceeds declared smoothness C^{declared}")]
    SmoothnessExceeded { requested: u32, declared: u32 },

    #[error("letter X{letter} needs a field of class C^{required}, assigned field is C^{declared}")]
    BracketRegularity {
        letter: u32,
        required: u32,
        declared: u32,
    },

    #[error("letter X{0} has no assigned field")]
    UnassignedLetter(u32),

    #[error("control value outside the control cone (distance {distance:.3e}) in cell {cell}")]
    ControlOutsideCone { cell: usize, distance: f64 },

    #[error("extended control violates w0 + |w| = 1 in cell {cell} (residual {residual:.3e})")]
    SimplexViolation { cell: usize, residual: f64 },

    #[error("not an embedded strict-sense process: w0 = {w0:.3e} in cell {cell}")]
    NotEmbedded { cell: usize, w0: f64 },

    #[error("point is not in the set (distance {distance:.3e})")]
    NotInSet { distance: f64 },

    #[error("set is not quasi prox-regular at the reference point")]
    NotQuasiProxRegular,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed document: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
