//! k-fold cross-validation and one-parameter sweeps over it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::metrics::{FoldMetrics, MacroMetrics};
use super::preprocess::InstanceSet;
use super::train::{train, Predictor};
use super::PipelineError;
use crate::corpus::split_folds;
use crate::embed::EmbeddingTable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldMetrics>,
    /// Metrics of the pooled confusion counts.
    pub aggregate: FoldMetrics,
    pub macro_average: MacroMetrics,
    pub generated: usize,
    pub excluded: usize,
}

/// Splits every candidate pair (usable or excluded) into `config.k_folds`
/// folds; each fold is scored by a model trained on the others. Folds run
/// in parallel and are reported in fold order.
pub fn cross_validate(
    config: &TrainConfig,
    set: &InstanceSet,
    table: &EmbeddingTable,
) -> Result<CvReport, PipelineError> {
    config.validate()?;
    let ids: Vec<String> = set
        .instances
        .iter()
        .map(|i| i.id.clone())
        .chain(set.excluded.iter().map(|e| e.id.clone()))
        .collect();
    let assignment = split_folds(&ids, config.k_folds, config.seed)?;
    let fold_of = |id: &str| assignment.fold_of(id).expect("every id is assigned");

    let folds = (0..config.k_folds)
        .into_par_iter()
        .map(|f| {
            let (test, train_set): (Vec<_>, Vec<_>) = set.instances.iter().cloned().partition(|i| fold_of(&i.id) == f);
            let excluded: Vec<_> = set.excluded.iter().filter(|e| fold_of(&e.id) == f).cloned().collect();
            let fold_config = TrainConfig {
                seed: config.seed.wrapping_add(f as u64),
                ..config.clone()
            };
            let ck = train(&fold_config, &train_set, table)?;
            let m = Predictor::new(&ck, table)?.evaluate(&test, &excluded, config.score_excluded)?;
            log::info!("fold {}: P={:.2} R={:.2} F1={:.2}", f + 1, m.precision, m.recall, m.f1);
            Ok(m)
        })
        .collect::<Result<Vec<FoldMetrics>, PipelineError>>()?;

    Ok(CvReport {
        aggregate: FoldMetrics::pooled(&folds),
        macro_average: MacroMetrics::of(&folds),
        folds,
        generated: set.generated(),
        excluded: set.excluded.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    Epochs,
    MlpHidden,
    Window,
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "epochs" => Ok(SweepParam::Epochs),
            "mlp_hidden" => Ok(SweepParam::MlpHidden),
            "window" => Ok(SweepParam::Window),
            other => Err(format!("cannot sweep `{other}` (epochs, mlp_hidden, window)")),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Epochs => "epochs",
            SweepParam::MlpHidden => "mlp_hidden",
            SweepParam::Window => "window",
        })
    }
}

impl SweepParam {
    pub fn apply(self, config: &mut TrainConfig, value: usize) {
        match self {
            SweepParam::Epochs => config.epochs = value,
            SweepParam::MlpHidden => config.mlp_hidden = value,
            SweepParam::Window => config.position_window = value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: SweepParam,
    pub value: usize,
    pub report: CvReport,
}

/// Cross-validates once per value of `param`.
pub fn sweep(
    config: &TrainConfig,
    set: &InstanceSet,
    table: &EmbeddingTable,
    param: SweepParam,
    values: &[usize],
) -> Result<Vec<SweepPoint>, PipelineError> {
    values
        .iter()
        .map(|&value| {
            let mut cfg = config.clone();
            param.apply(&mut cfg, value);
            let report = cross_validate(&cfg, set, table)?;
            Ok(SweepPoint { param, value, report })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::preprocess::preprocess;
    use crate::pipeline::synthetic::synthetic_corpus;

    fn quick() -> TrainConfig {
        TrainConfig {
            lstm_units: 4,
            mlp_hidden: 4,
            epochs: 2,
            k_folds: 2,
            embedding_dim: 6,
            ae_epochs: 5,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn folds_partition_the_candidates() {
        let syn = synthetic_corpus(40, 1, 6);
        let set = preprocess(&syn.sentences, &syn.deps, quick().features()).unwrap();
        let r = cross_validate(&quick(), &set, &syn.embeddings).unwrap();
        assert_eq!(r.folds.len(), 2);
        assert_eq!(r.aggregate.total(), 40);
        assert_eq!(r.folds.iter().map(FoldMetrics::total).sum::<usize>(), 40);
        assert_eq!(r, cross_validate(&quick(), &set, &syn.embeddings).unwrap());
    }

    #[test]
    fn too_many_folds_is_bad_k() {
        let syn = synthetic_corpus(3, 1, 6);
        let set = preprocess(&syn.sentences, &syn.deps, quick().features()).unwrap();
        let cfg = TrainConfig { k_folds: 4, ..quick() };
        assert!(matches!(
            cross_validate(&cfg, &set, &syn.embeddings),
            Err(PipelineError::Corpus(crate::corpus::CorpusError::BadK { .. }))
        ));
    }

    #[test]
    fn single_class_folds_are_defined() {
        let mut syn = synthetic_corpus(6, 2, 6);
        for s in &mut syn.sentences {
            s.interactions.clear();
        }
        let set = preprocess(&syn.sentences, &syn.deps, quick().features()).unwrap();
        let r = cross_validate(&quick(), &set, &syn.embeddings).unwrap();
        for m in r.folds.iter().chain([&r.aggregate]) {
            assert!(m.precision.is_finite() && m.recall == 0.0 && m.f1 == 0.0);
        }
    }

    #[test]
    fn sweep_applies_values() {
        let syn = synthetic_corpus(8, 2, 6);
        let set = preprocess(&syn.sentences, &syn.deps, quick().features()).unwrap();
        let pts = sweep(&quick(), &set, &syn.embeddings, SweepParam::Window, &[5, 12]).unwrap();
        assert_eq!(pts.iter().map(|p| p.value).collect::<Vec<_>>(), [5, 12]);
        assert!("depth".parse::<SweepParam>().is_err());
    }
}
