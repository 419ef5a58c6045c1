use thiserror::Error;

/// Errors raised while building geometries, channels, or solver inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwiptError {
    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("invalid user array: {0}")]
    InvalidUserArray(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-positive gain at element {index}: {value}")]
    NonPositiveGain { index: usize, value: f64 },

    #[error("user antenna {antenna} is behind panel element {element} (projection {projection})")]
    BehindPanel {
        antenna: usize,
        element: usize,
        projection: f64,
    },

    #[error("zero distance between user antenna {antenna} and panel element {element}")]
    ZeroDistance { antenna: usize, element: usize },

    #[error("zero beamformer")]
    ZeroBeamformer,

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SwiptError>;

impl From<std::io::Error> for SwiptError {
    fn from(e: std::io::Error) -> Self {
        SwiptError::Io(e.to_string())
    }
}
