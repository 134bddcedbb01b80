use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// `1 + μλₖ` vanished while evaluating the secular function.
    #[error("secular function evaluated at a pole (mu = {mu})")]
    Pole { mu: f64 },

    /// The single constraint has an empty feasible set, or no sign change of
    /// the secular function could be bracketed.
    #[error("constraint appears infeasible: {0}")]
    InfeasibleConstraint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("instance format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
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
        Error::Format(e.to_string())
    }
}
