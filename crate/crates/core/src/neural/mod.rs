//! Convolutional pair classifiers over phoneme feature matrices.

mod checkpoint;
mod model;
pub mod ops;
mod optim;
mod tensor;
mod train;

pub use checkpoint::{load_checkpoint, parse_checkpoint, save_checkpoint, to_checkpoint_text};
pub use model::{Architecture, LossKind, ModelSpec, Network, ParamSet, Sample, ShapePlan};
pub use optim::{Adadelta, AdadeltaConfig};
pub use tensor::Tensor;
pub use train::{train, TrainConfig, TrainReport};

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("{op}: expected shape {expected:?}, got {got:?}")]
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("empty training set")]
    EmptyDataset,
    #[error("checkpoint line {line}: {reason}")]
    Checkpoint { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}
