//! The learned embedding-space transform: a two-layer MLP trained with Adam
//! on mean squared error.

mod adam;
mod mlp;
mod model_io;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use mlp::{
    forward, gradients, init_model, mse_loss, param_count, transform_embeddings, Activation,
    MlpModel, MlpParams,
};
pub use model_io::{
    decode_mlp1, encode_mlp1, load_model, load_model_with, save_model, MLP_HEADER_LEN,
};
pub use train::{
    train, train_with_validator, Checkpoint, CheckpointRecord, EarlyStopper, StopReason,
    TrainingConfig, TrainingLog,
};

use thiserror::Error;

use crate::embedding::EmbeddingError;

#[derive(Debug, Error)]
pub enum SimplifierError {
    #[error("dimension mismatch: model {model}, input {input}")]
    DimMismatch { model: usize, input: usize },
    #[error("shape mismatch")]
    ShapeMismatch,
    #[error("row mismatch: {0} inputs vs {1} targets")]
    RowMismatch(usize, usize),
    #[error("non-finite parameter or output")]
    NonFinite,
    #[error("validation loss became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u32),
    #[error("file truncated: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: usize, actual: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}
