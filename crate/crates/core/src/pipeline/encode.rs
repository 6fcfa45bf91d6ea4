//! Turns symbolic path instances into sequences of token vectors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::config::FeatureSettings;
use super::preprocess::SdpInstance;
use super::PipelineError;
use crate::embed::{assemble_with, EmbeddingTable, FeatureLayout};
use crate::features::{
    encode_dense, encode_pos_onehot, encode_position_window, train_autoencoder, Autoencoder, PosTable, POS_CLASSES,
};

/// Fitted encoders for the optional PoS and position segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoders {
    pub settings: FeatureSettings,
    pub pos_table: PosTable,
    pub pos_autoencoder: Option<Autoencoder>,
    /// Shared by the distances to both targets.
    pub position_autoencoder: Option<Autoencoder>,
}

fn to_bits(v: Vec<u8>) -> Vec<f64> {
    v.into_iter().map(f64::from).collect()
}

impl FeatureEncoders {
    /// Trains the autoencoders on the distinct codes occurring in
    /// `instances`, in sorted order.
    pub fn fit(
        settings: FeatureSettings,
        pos_table: PosTable,
        instances: &[SdpInstance],
        ae_epochs: usize,
        seed: u64,
    ) -> Result<Self, PipelineError> {
        let pos_autoencoder = if settings.use_pos {
            let codes: BTreeSet<Vec<u8>> = instances
                .iter()
                .flat_map(|i| &i.pos_tags)
                .map(|t| encode_pos_onehot(pos_table.class_of(t)).bits.to_vec())
                .collect();
            let samples: Vec<Vec<f64>> = codes.into_iter().map(to_bits).collect();
            Some(train_autoencoder(&samples, POS_CLASSES, ae_epochs, seed)?.model)
        } else {
            None
        };
        let position_autoencoder = if settings.use_position {
            let codes: BTreeSet<Vec<u8>> = instances
                .iter()
                .flat_map(|i| (0..i.len()).flat_map(move |k| [i.distance_to_first(k), i.distance_to_second(k)]))
                .map(|d| encode_position_window(d, settings.window).bits)
                .collect();
            let samples: Vec<Vec<f64>> = codes.into_iter().map(to_bits).collect();
            Some(train_autoencoder(&samples, settings.window, ae_epochs, seed.wrapping_add(1))?.model)
        } else {
            None
        };
        Ok(FeatureEncoders {
            settings,
            pos_table,
            pos_autoencoder,
            position_autoencoder,
        })
    }

    pub fn layout(&self, word_dim: usize) -> FeatureLayout {
        FeatureLayout {
            word: word_dim,
            pos: if self.settings.use_pos { POS_CLASSES } else { 0 },
            position: if self.settings.use_position {
                self.settings.window
            } else {
                0
            },
        }
    }

    fn pos_segment(&self, tag: &str) -> Result<Vec<f64>, PipelineError> {
        match &self.pos_autoencoder {
            Some(ae) => Ok(encode_dense(
                ae,
                &encode_pos_onehot(self.pos_table.class_of(tag)).to_f64(),
            )?),
            None => Ok(Vec::new()),
        }
    }

    fn position_segment(&self, d: i64) -> Result<Vec<f64>, PipelineError> {
        match &self.position_autoencoder {
            Some(ae) => Ok(encode_dense(
                ae,
                &encode_position_window(d, self.settings.window).to_f64(),
            )?),
            None => Ok(Vec::new()),
        }
    }

    /// Token vectors of `inst`, word vectors taken from `words`.
    pub fn encode(&self, inst: &SdpInstance, words: &WordVectors<'_>) -> Result<Vec<Vec<f64>>, PipelineError> {
        let layout = self.layout(words.dim());
        (0..inst.len())
            .map(|k| {
                let w = words.lookup(&inst.tokens[k]);
                let v = assemble_with(
                    &layout,
                    &w,
                    &self.pos_segment(&inst.pos_tags[k])?,
                    &self.position_segment(inst.distance_to_first(k))?,
                    &self.position_segment(inst.distance_to_second(k))?,
                )?;
                Ok(v.into_inner())
            })
            .collect()
    }
}

/// Word vector source: trained overrides first, then the pretrained table.
#[derive(Clone, Copy, Debug)]
pub struct WordVectors<'a> {
    pub table: &'a EmbeddingTable,
    pub overrides: Option<&'a BTreeMap<String, Vec<f64>>>,
}

impl<'a> WordVectors<'a> {
    pub fn new(table: &'a EmbeddingTable) -> Self {
        WordVectors { table, overrides: None }
    }

    pub fn with_overrides(table: &'a EmbeddingTable, overrides: &'a BTreeMap<String, Vec<f64>>) -> Self {
        WordVectors {
            table,
            overrides: Some(overrides),
        }
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn lookup(&self, token: &str) -> Vec<f64> {
        self.overrides
            .and_then(|o| o.get(token))
            .cloned()
            .unwrap_or_else(|| self.table.lookup(token))
    }
}
