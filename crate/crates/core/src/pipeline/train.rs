//! Mini-batch training, prediction and evaluation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, FORMAT_VERSION};
use super::config::{ModelKind, Optimizer, TrainConfig};
use super::encode::{FeatureEncoders, WordVectors};
use super::metrics::FoldMetrics;
use super::preprocess::{Exclusion, SdpInstance};
use super::PipelineError;
use crate::corpus::{Label, PROT1, PROT2, PROTX};
use crate::embed::{load_embeddings, EmbeddingTable};
use crate::features::PosTable;
use crate::neural::{dropout_mask, Adadelta, Adam, DropoutMasks, ModelParams, NeuralError};

/// Seed offset separating autoencoder pretraining from the classifier.
const AUTOENCODER_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Word vectors named by the config: the embedding file if one is set,
/// otherwise an empty table whose lookups all fall back to generated vectors.
pub fn embedding_table(config: &TrainConfig) -> Result<EmbeddingTable, PipelineError> {
    match &config.embedding_path {
        Some(p) => Ok(load_embeddings(p, config.oov_seed)?),
        None => Ok(EmbeddingTable::new(config.embedding_dim, config.oov_seed)),
    }
}

enum Stepper {
    Adam(Adam),
    Adadelta(Adadelta),
}

impl Stepper {
    fn new(kind: Optimizer, lr: f64) -> Self {
        match kind {
            Optimizer::Adam => Stepper::Adam(Adam::new(lr)),
            Optimizer::Adadelta => {
                let mut a = Adadelta::default();
                a.lr = lr;
                Stepper::Adadelta(a)
            }
        }
    }

    fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NeuralError> {
        match self {
            Stepper::Adam(a) => a.step(params, grads),
            Stepper::Adadelta(a) => a.step(params, grads),
        }
    }
}

fn special_vectors(table: &EmbeddingTable) -> BTreeMap<String, Vec<f64>> {
    [PROT1, PROT2, PROTX]
        .into_iter()
        .filter_map(|t| table.special(t).map(|v| (t.to_owned(), v.to_vec())))
        .collect()
}

/// Trains the classifier chosen by `config.model`.
pub fn train(
    config: &TrainConfig,
    instances: &[SdpInstance],
    table: &EmbeddingTable,
) -> Result<Checkpoint, PipelineError> {
    train_with_observer(config, instances, table, |_, _| {})
}

/// Concatenation baseline: the first `max_len` token vectors, zero padded,
/// go straight into the classifier head.
pub fn baseline_mlp(
    config: &TrainConfig,
    instances: &[SdpInstance],
    table: &EmbeddingTable,
) -> Result<Checkpoint, PipelineError> {
    let config = TrainConfig {
        model: ModelKind::ConcatMlp,
        ..config.clone()
    };
    train(&config, instances, table)
}

/// Recurrent baseline: the last hidden state of a sigmoid RNN summarizes
/// the path.
pub fn baseline_rnn(
    config: &TrainConfig,
    instances: &[SdpInstance],
    table: &EmbeddingTable,
) -> Result<Checkpoint, PipelineError> {
    let config = TrainConfig {
        model: ModelKind::Rnn,
        ..config.clone()
    };
    train(&config, instances, table)
}

/// [`train`], calling `observer(epoch, mean_loss)` after every epoch.
pub fn train_with_observer(
    config: &TrainConfig,
    instances: &[SdpInstance],
    table: &EmbeddingTable,
    mut observer: impl FnMut(usize, f64),
) -> Result<Checkpoint, PipelineError> {
    config.validate()?;
    if instances.is_empty() {
        return Err(PipelineError::EmptyTrainingSet);
    }

    let pos_table = match &config.pos_table {
        Some(p) => PosTable::load(p)?,
        None => PosTable::default(),
    };
    let encoders = FeatureEncoders::fit(
        config.features(),
        pos_table,
        instances,
        config.ae_epochs,
        config.seed ^ AUTOENCODER_SEED_SALT,
    )?;
    let word_dim = table.dim();
    let specials = special_vectors(table);

    let mut tuned: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    if config.tune_embeddings {
        let words = WordVectors::new(table);
        for t in instances.iter().flat_map(|i| &i.tokens) {
            tuned.entry(t.clone()).or_insert_with(|| words.lookup(t));
        }
    }
    let words = WordVectors::new(table);
    let data: Vec<Vec<Vec<f64>>> = instances
        .iter()
        .map(|i| encoders.encode(i, &words))
        .collect::<Result<_, _>>()?;
    let token_dim = encoders.layout(word_dim).total();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = ModelParams::init(config.architecture(), token_dim, config.head_shape(), &mut rng);
    let mut opt = Stepper::new(config.optimizer, config.learning_rate);
    let mut emb_opt = Stepper::new(config.optimizer, config.learning_rate);
    let summary_dim = model.summary_dim();

    let mut order: Vec<usize> = (0..instances.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch) {
            let scale = 1.0 / batch.len() as f64;
            let mut grads = model.zeros_like();
            let mut emb_grads: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for &i in batch {
                let masks = if config.dropout > 0.0 {
                    Some(DropoutMasks {
                        pooled: dropout_mask(summary_dim, config.dropout, &mut rng)?,
                        hidden: (0..config.mlp_depth)
                            .map(|_| dropout_mask(config.mlp_hidden, config.dropout, &mut rng))
                            .collect::<Result<_, _>>()?,
                    })
                } else {
                    None
                };
                let inst = &instances[i];
                let label = inst.label.index();
                let pass = if config.tune_embeddings {
                    let mut xs = data[i].clone();
                    for (x, t) in xs.iter_mut().zip(&inst.tokens) {
                        x[..word_dim].copy_from_slice(&tuned[t]);
                    }
                    model.forward(&xs, masks.as_ref())?
                } else {
                    model.forward(&data[i], masks.as_ref())?
                };
                loss_sum += pass.loss(label);
                let dxs = model.backward(&pass, label, scale, &mut grads)?;
                if config.tune_embeddings {
                    for (dx, t) in dxs.iter().zip(&inst.tokens) {
                        let g = emb_grads.entry(t.as_str()).or_insert_with(|| vec![0.0; word_dim]);
                        for (a, b) in g.iter_mut().zip(&dx[..word_dim]) {
                            *a += b;
                        }
                    }
                }
            }
            let grad_tensors = grads.tensors();
            opt.step(&mut model.tensors_mut(), &grad_tensors)?;
            if config.tune_embeddings {
                let zero = vec![0.0; word_dim];
                let g: Vec<&[f64]> = tuned
                    .keys()
                    .map(|k| emb_grads.get(k.as_str()).map_or(&zero[..], |v| &v[..]))
                    .collect();
                let mut p: Vec<&mut [f64]> = tuned.values_mut().map(|v| &mut v[..]).collect();
                emb_opt.step(&mut p, &g)?;
            }
        }
        let mean = loss_sum / instances.len() as f64;
        if !mean.is_finite() || !model.is_finite() {
            return Err(PipelineError::NonFiniteLoss { epoch });
        }
        log::debug!("epoch {epoch}: mean loss {mean:.6}");
        observer(epoch, mean);
        epoch_losses.push(mean);
    }

    Ok(Checkpoint {
        format_version: FORMAT_VERSION,
        config: config.clone(),
        model,
        encoders,
        oov_seed: table.oov_seed,
        word_dim,
        special_vectors: specials,
        tuned_vectors: tuned,
        epoch_losses,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub prob_positive: f64,
}

impl Prediction {
    /// Interacting iff `prob_positive ≥ 0.5`.
    pub fn from_prob(prob_positive: f64) -> Self {
        let label = if prob_positive >= 0.5 {
            Label::Interacting
        } else {
            Label::NonInteracting
        };
        Prediction { label, prob_positive }
    }
}

/// A checkpoint paired with the word vectors it was trained against.
#[derive(Debug)]
pub struct Predictor<'a> {
    ck: &'a Checkpoint,
    table: &'a EmbeddingTable,
    overrides: BTreeMap<String, Vec<f64>>,
}

impl<'a> Predictor<'a> {
    pub fn new(ck: &'a Checkpoint, table: &'a EmbeddingTable) -> Result<Self, PipelineError> {
        if table.dim() != ck.word_dim {
            return Err(PipelineError::DimensionMismatch {
                what: "word vectors",
                expected: ck.word_dim,
                found: table.dim(),
            });
        }
        let mut overrides = ck.special_vectors.clone();
        overrides.extend(ck.tuned_vectors.iter().map(|(k, v)| (k.clone(), v.clone())));
        Ok(Predictor { ck, table, overrides })
    }

    pub fn predict(&self, inst: &SdpInstance) -> Result<Prediction, PipelineError> {
        let words = WordVectors::with_overrides(self.table, &self.overrides);
        let xs = self.ck.encoders.encode(inst, &words)?;
        let pass = self.ck.model.forward(&xs, None)?;
        Ok(Prediction::from_prob(pass.prob_positive()))
    }

    /// Confusion counts over `instances`. With `score_excluded`, every
    /// excluded pair counts as a NonInteracting prediction.
    pub fn evaluate(
        &self,
        instances: &[SdpInstance],
        excluded: &[Exclusion],
        score_excluded: bool,
    ) -> Result<FoldMetrics, PipelineError> {
        let mut pairs = Vec::with_capacity(instances.len() + excluded.len());
        for inst in instances {
            pairs.push((inst.label, self.predict(inst)?.label));
        }
        if score_excluded {
            pairs.extend(excluded.iter().map(|e| (e.label, Label::NonInteracting)));
        }
        Ok(FoldMetrics::from_pairs(pairs))
    }
}

pub fn predict(ck: &Checkpoint, table: &EmbeddingTable, inst: &SdpInstance) -> Result<Prediction, PipelineError> {
    Predictor::new(ck, table)?.predict(inst)
}

pub fn evaluate(
    ck: &Checkpoint,
    table: &EmbeddingTable,
    instances: &[SdpInstance],
) -> Result<FoldMetrics, PipelineError> {
    Predictor::new(ck, table)?.evaluate(instances, &[], false)
}
