//! Numerical kernels of the classifiers, each with an explicit forward and
//! backward pass, plus optimizers, dropout and gradient verification.

pub mod activation;
pub mod dropout;
pub mod gradcheck;
pub mod head;
pub mod linalg;
pub mod loss;
pub mod lstm;
pub mod model;
pub mod optim;
pub mod rnn;

use thiserror::Error;

pub use activation::{sigmoid, softmax, Activation};
pub use dropout::{dropout_mask, DropoutMasks};
pub use gradcheck::{check_gradients, GradCheckReport};
pub use head::MlpHead;
pub use linalg::Matrix;
pub use loss::cross_entropy;
pub use lstm::{lstm_cell, LstmParams};
pub use model::{
    bilstm_forward, max_pool, mlp_head, Architecture, ForwardPass, Gradients, HeadOutputs, HeadShape, ModelParams,
    SequenceEncoder,
};
pub use optim::{Adadelta, Adam};
pub use rnn::RnnParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("empty sequence")]
    EmptySequence,
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dropout rate {0} outside [0, 1)")]
    BadRate(f64),
}
