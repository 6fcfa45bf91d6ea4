//! Sparse PoS and relative-position codes for path tokens, and the
//! autoencoders that turn them into dense vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neural::activation::sigmoid;
use crate::neural::linalg::Matrix;
use crate::neural::optim::Adadelta;

pub const POS_CLASSES: usize = 8;
pub const POSITION_DIM: usize = 10;
/// Smallest and largest supported position window.
pub const WINDOW_RANGE: (usize, usize) = (5, 12);

pub const DEFAULT_AE_EPOCHS: usize = 500;

const DEFAULT_POS_TABLE: &str = include_str!("../data/pos_classes.tsv");
pub const POS_TABLE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no training samples")]
    EmptySamples,
    #[error("PoS table line {line}: {reason}")]
    TableParse { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosClass {
    Noun = 0,
    Verb = 1,
    Adjective = 2,
    Adverb = 3,
    Preposition = 4,
    Conjunction = 5,
    Determiner = 6,
    Other = 7,
}

impl PosClass {
    pub fn from_index(i: usize) -> Option<Self> {
        use PosClass::*;
        [
            Noun,
            Verb,
            Adjective,
            Adverb,
            Preposition,
            Conjunction,
            Determiner,
            Other,
        ]
        .get(i)
        .copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Tag → coarse class mapping. Unknown tags map to [`PosClass::Other`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosTable {
    pub version: u32,
    pub classes: BTreeMap<String, u8>,
}

impl Default for PosTable {
    fn default() -> Self {
        PosTable::parse(DEFAULT_POS_TABLE).expect("bundled PoS table is valid")
    }
}

impl PosTable {
    /// Parses `tag<TAB>class_index` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut classes = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| FeatureError::TableParse { line: idx + 1, reason };
            let (tag, class) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `tag<TAB>class_index`".into()))?;
            let class: u8 = class
                .trim()
                .parse()
                .map_err(|_| err(format!("bad class index `{class}`")))?;
            if class as usize >= POS_CLASSES {
                return Err(err(format!("class index {class} outside [0, {POS_CLASSES})")));
            }
            classes.insert(tag.trim().to_owned(), class);
        }
        Ok(PosTable {
            version: POS_TABLE_VERSION,
            classes,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        PosTable::parse(&fs::read_to_string(path)?)
    }

    pub fn class_of(&self, tag: &str) -> usize {
        self.classes.get(tag).map_or(PosClass::Other.index(), |&c| c as usize)
    }
}

/// Coarse class of a tag under the bundled table.
pub fn coarse_pos(tag: &str) -> usize {
    thread_local! {
        static TABLE: PosTable = PosTable::default();
    }
    TABLE.with(|t| t.class_of(tag))
}

/// Eight-bit one-hot PoS code. Displayed with class 0 leftmost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PosOneHot {
    pub bits: [u8; POS_CLASSES],
}

impl PosOneHot {
    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }
}

impl fmt::Display for PosOneHot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Panics if `class` is not below [`POS_CLASSES`].
pub fn encode_pos_onehot(class: usize) -> PosOneHot {
    assert!(class < POS_CLASSES, "PoS class {class} out of range");
    let mut bits = [0u8; POS_CLASSES];
    bits[class] = 1;
    PosOneHot { bits }
}

/// Thermometer code of a relative distance. `bits[0]` is the lowest-order
/// position; the display string puts the highest-order bit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PositionCode {
    pub bits: Vec<u8>,
}

impl PositionCode {
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }
}

impl fmt::Display for PositionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits.iter().rev() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Ten-bit thermometer code: the `min(|d|, 10)` lowest bits are set.
pub fn encode_position(rel_distance: i64) -> PositionCode {
    encode_position_window(rel_distance, POSITION_DIM)
}

/// Thermometer code over `window` bits.
pub fn encode_position_window(rel_distance: i64, window: usize) -> PositionCode {
    let m = (rel_distance.unsigned_abs() as usize).min(window);
    let mut bits = vec![0u8; window];
    for b in &mut bits[..m] {
        *b = 1;
    }
    PositionCode { bits }
}

/// Single-layer sigmoid encoder and decoder of equal width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    pub encoder_weights: Matrix,
    pub encoder_bias: Vec<f64>,
    pub decoder_weights: Matrix,
    pub decoder_bias: Vec<f64>,
}

impl Autoencoder {
    pub fn zeros(dim: usize) -> Self {
        Autoencoder {
            encoder_weights: Matrix::zeros(dim, dim),
            encoder_bias: vec![0.0; dim],
            decoder_weights: Matrix::zeros(dim, dim),
            decoder_bias: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.encoder_bias.len()
    }

    pub fn encode(&self, bits: &[f64]) -> Vec<f64> {
        let mut z = self.encoder_bias.clone();
        self.encoder_weights.mul_vec_add(bits, &mut z);
        z.into_iter().map(sigmoid).collect()
    }

    pub fn decode(&self, code: &[f64]) -> Vec<f64> {
        let mut y = self.decoder_bias.clone();
        self.decoder_weights.mul_vec_add(code, &mut y);
        y.into_iter().map(sigmoid).collect()
    }

    pub fn reconstruct(&self, bits: &[f64]) -> Vec<f64> {
        self.decode(&self.encode(bits))
    }

    /// Mean over samples of the squared reconstruction error `‖p − p′‖²`.
    pub fn loss(&self, samples: &[Vec<f64>]) -> f64 {
        samples
            .iter()
            .map(|p| {
                self.reconstruct(p)
                    .iter()
                    .zip(p)
                    .map(|(y, t)| (y - t) * (y - t))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / samples.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.encoder_weights.is_finite()
            && self.decoder_weights.is_finite()
            && self
                .encoder_bias
                .iter()
                .chain(&self.decoder_bias)
                .all(|v| v.is_finite())
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.encoder_weights.as_mut_slice(),
            &mut self.encoder_bias,
            self.decoder_weights.as_mut_slice(),
            &mut self.decoder_bias,
        ]
    }

    /// Full-batch gradient of the summed squared error over `samples`.
    fn gradient(&self, samples: &[Vec<f64>]) -> Autoencoder {
        let dim = self.dim();
        let mut g = Autoencoder::zeros(dim);
        for p in samples {
            let z = self.encode(p);
            let y = self.decode(&z);
            let d_dec: Vec<f64> = (0..dim).map(|j| 2.0 * (y[j] - p[j]) * y[j] * (1.0 - y[j])).collect();
            g.decoder_weights.add_outer(&d_dec, &z);
            for (b, d) in g.decoder_bias.iter_mut().zip(&d_dec) {
                *b += d;
            }
            let mut dz = vec![0.0; dim];
            self.decoder_weights.tr_mul_vec_add(&d_dec, &mut dz);
            let d_enc: Vec<f64> = (0..dim).map(|j| dz[j] * z[j] * (1.0 - z[j])).collect();
            g.encoder_weights.add_outer(&d_enc, p);
            for (b, d) in g.encoder_bias.iter_mut().zip(&d_enc) {
                *b += d;
            }
        }
        g
    }
}

/// A trained autoencoder with its per-epoch training loss.
#[derive(Clone, Debug)]
pub struct AutoencoderFit {
    pub model: Autoencoder,
    /// Loss before each epoch's update; `losses[0]` is the untrained loss.
    pub losses: Vec<f64>,
    pub final_loss: f64,
}

/// Full-batch Adadelta (ρ = 0.95, ε = 1e-6) on the squared reconstruction
/// error summed over the batch. Weights start Glorot-uniform from `seed`, biases at zero.
pub fn train_autoencoder(
    samples: &[Vec<f64>],
    dim: usize,
    epochs: usize,
    seed: u64,
) -> Result<AutoencoderFit, FeatureError> {
    if samples.is_empty() {
        return Err(FeatureError::EmptySamples);
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(FeatureError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Autoencoder {
        encoder_weights: Matrix::glorot(dim, dim, &mut rng),
        encoder_bias: vec![0.0; dim],
        decoder_weights: Matrix::glorot(dim, dim, &mut rng),
        decoder_bias: vec![0.0; dim],
    };
    let mut opt = Adadelta::default();
    let mut losses = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        losses.push(model.loss(samples));
        let mut g = model.gradient(samples);
        let grads = g.tensors_mut();
        let grads: Vec<&[f64]> = grads.into_iter().map(|t| &*t).collect();
        opt.step(&mut model.tensors_mut(), &grads)
            .expect("autoencoder tensors keep their shapes");
    }
    let final_loss = model.loss(samples);
    Ok(AutoencoderFit {
        model,
        losses,
        final_loss,
    })
}

/// Dense code `sigmoid(W_enc · bits + b_enc)`.
pub fn encode_dense(ae: &Autoencoder, bits: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if bits.len() != ae.dim() {
        return Err(FeatureError::DimensionMismatch {
            expected: ae.dim(),
            found: bits.len(),
        });
    }
    Ok(ae.encode(bits))
}
