use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("illegal action: node {node} with label {label}")]
    IllegalAction { node: usize, label: usize },

    #[error("search budget of {budget} nodes exhausted (bounds {lower}..={upper})")]
    BudgetExhausted {
        budget: u64,
        lower: usize,
        upper: usize,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
