//! End-to-end orchestration: preprocessing, training, evaluation,
//! cross-validation and model files.

pub mod checkpoint;
pub mod config;
pub mod cv;
pub mod encode;
pub mod metrics;
pub mod preprocess;
pub mod report;
pub mod synthetic;
pub mod train;

use std::path::Path;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::depgraph::{DepFileError, GraphError};
use crate::embed::EmbedError;
use crate::features::FeatureError;
use crate::neural::NeuralError;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError};
pub use config::{ConfigError, FeatureSettings, ModelKind, Optimizer, TrainConfig};
pub use cv::{cross_validate, sweep, CvReport, SweepParam, SweepPoint};
pub use encode::{FeatureEncoders, WordVectors};
pub use metrics::{f1_score, FoldMetrics, MacroMetrics};
pub use preprocess::{preprocess, Exclusion, ExclusionReason, ExclusionTally, InstanceSet, SdpInstance};
pub use train::{
    baseline_mlp, baseline_rnn, embedding_table, evaluate, predict, train, train_with_observer, Prediction, Predictor,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Dependencies(#[from] DepFileError),
    #[error("sentence `{sentence}`: {source}")]
    Graph { sentence: String, source: GraphError },
    #[error("sentence `{sentence}`: edge {head}-{dependent} outside its {tokens} tokens")]
    BadEdge {
        sentence: String,
        head: usize,
        dependent: usize,
        tokens: usize,
    },
    #[error("no dependency data for sentence `{0}`")]
    MissingDependencyData(String),
    #[error(transparent)]
    Embedding(#[from] EmbedError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("no training instances")]
    EmptyTrainingSet,
    #[error("training loss became non-finite in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("{what}: model expects dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Input(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    pub(crate) fn read(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Read {
            path: path.display().to_string(),
            source,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            PipelineError::NonFiniteLoss { .. }
                | PipelineError::Neural(NeuralError::NonFiniteGradient | NeuralError::NonFiniteInput)
        )
    }
}
