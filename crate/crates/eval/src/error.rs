use thiserror::Error;

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Core(#[from] nodelab_core::Error),

    #[error(transparent)]
    Policy(#[from] nodelab_policy::PolicyError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl EvalError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        EvalError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Whether the error stems from how the program was invoked rather than
    /// from a failure while running.
    pub fn is_usage(&self) -> bool {
        use nodelab_core::Error as C;
        use nodelab_policy::PolicyError as P;
        matches!(
            self,
            EvalError::Usage(_)
                | EvalError::Config(_)
                | EvalError::Json { .. }
                | EvalError::Core(C::Usage(_) | C::Parameter(_))
                | EvalError::Policy(P::Usage(_) | P::Config(_) | P::Core(C::Usage(_) | C::Parameter(_)))
        )
    }
}
