use nodelab_autodiff::TensorError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Core(#[from] nodelab_core::Error),
    #[error("checkpoint tensor `{tensor}`: {message}")]
    CheckpointTensor { tensor: String, message: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("numeric failure at epoch {epoch}, batch {batch}: {message}")]
    Numeric {
        epoch: usize,
        batch: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = PolicyError> = std::result::Result<T, E>;
