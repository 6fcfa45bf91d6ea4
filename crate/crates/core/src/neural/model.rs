//! Full classifiers: a sequence encoder feeding the MLP head.
//!
//! * `BiLstm`: forward and backward LSTM passes, per-position concatenation
//!   `z_k = [→h_k ; ←h_k]`, coordinate-wise max over positions.
//! * `Concat`: the token vectors of a fixed-length window, concatenated.
//! * `Rnn`: the last hidden state of a simple sigmoid recurrent encoder.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::dropout::DropoutMasks;
use super::head::{HeadCache, MlpHead};
use super::loss::cross_entropy;
use super::lstm::{LstmParams, StepCache};
use super::rnn::{RnnParams, RnnStep};
use super::NeuralError;

/// Number of output labels.
pub const LABELS: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
pub enum SequenceEncoder {
    BiLstm { forward: LstmParams, backward: LstmParams },
    Concat { max_len: usize, token_dim: usize },
    Rnn(RnnParams),
}

impl SequenceEncoder {
    pub fn output_dim(&self) -> usize {
        match self {
            SequenceEncoder::BiLstm { forward, .. } => 2 * forward.units(),
            SequenceEncoder::Concat { max_len, token_dim } => max_len * token_dim,
            SequenceEncoder::Rnn(p) => p.units(),
        }
    }

    pub fn token_dim(&self) -> usize {
        match self {
            SequenceEncoder::BiLstm { forward, .. } => forward.input_dim(),
            SequenceEncoder::Concat { token_dim, .. } => *token_dim,
            SequenceEncoder::Rnn(p) => p.input_dim(),
        }
    }

    fn tensors(&self) -> Vec<&[f64]> {
        match self {
            SequenceEncoder::BiLstm { forward, backward } => {
                let mut t = forward.tensors();
                t.extend(backward.tensors());
                t
            }
            SequenceEncoder::Concat { .. } => Vec::new(),
            SequenceEncoder::Rnn(p) => p.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            SequenceEncoder::BiLstm { forward, backward } => {
                let mut t = forward.tensors_mut();
                t.extend(backward.tensors_mut());
                t
            }
            SequenceEncoder::Concat { .. } => Vec::new(),
            SequenceEncoder::Rnn(p) => p.tensors_mut(),
        }
    }

    fn zeros_like(&self) -> Self {
        match self {
            SequenceEncoder::BiLstm { forward, .. } => SequenceEncoder::BiLstm {
                forward: LstmParams::zeros(forward.input_dim(), forward.units()),
                backward: LstmParams::zeros(forward.input_dim(), forward.units()),
            },
            SequenceEncoder::Concat { max_len, token_dim } => SequenceEncoder::Concat {
                max_len: *max_len,
                token_dim: *token_dim,
            },
            SequenceEncoder::Rnn(p) => SequenceEncoder::Rnn(RnnParams::zeros(p.input_dim(), p.units())),
        }
    }
}

/// Shape of a classifier to construct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Architecture {
    SdpLstm { units: usize },
    ConcatMlp { max_len: usize },
    Rnn { units: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub encoder: SequenceEncoder,
    pub head: MlpHead,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeadShape {
    pub hidden: usize,
    pub depth: usize,
    pub activation: Activation,
}

impl Default for HeadShape {
    fn default() -> Self {
        HeadShape {
            hidden: 30,
            depth: 1,
            activation: Activation::Sigmoid,
        }
    }
}

#[derive(Clone, Debug)]
enum EncoderCache {
    BiLstm {
        forward: Vec<StepCache>,
        /// Steps of the backward LSTM in processing order (last token first).
        backward: Vec<StepCache>,
        /// Position that supplied each pooled coordinate.
        argmax: Vec<usize>,
    },
    Concat,
    Rnn(Vec<RnnStep>),
}

/// Cached forward pass of one instance.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    len: usize,
    encoder: EncoderCache,
    pooled: Vec<f64>,
    pooled_mask: Option<Vec<f64>>,
    pub head: HeadCache,
}

impl ForwardPass {
    pub fn probs(&self) -> &[f64] {
        &self.head.probs
    }

    pub fn prob_positive(&self) -> f64 {
        self.head.probs[1]
    }

    /// Sequence summary `S` before dropout.
    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn loss(&self, label: usize) -> f64 {
        cross_entropy(self.prob_positive(), label == 1)
    }
}

/// Gradients share the layout of the parameters.
pub type Gradients = ModelParams;

impl ModelParams {
    pub fn init<R: Rng + ?Sized>(arch: Architecture, token_dim: usize, head: HeadShape, rng: &mut R) -> Self {
        let encoder = match arch {
            Architecture::SdpLstm { units } => SequenceEncoder::BiLstm {
                forward: LstmParams::init(token_dim, units, rng),
                backward: LstmParams::init(token_dim, units, rng),
            },
            Architecture::ConcatMlp { max_len } => SequenceEncoder::Concat { max_len, token_dim },
            Architecture::Rnn { units } => SequenceEncoder::Rnn(RnnParams::init(token_dim, units, rng)),
        };
        let head = MlpHead::init(
            encoder.output_dim(),
            head.hidden,
            head.depth,
            LABELS,
            head.activation,
            rng,
        );
        ModelParams { encoder, head }
    }

    pub fn zeros(arch: Architecture, token_dim: usize, head: HeadShape) -> Self {
        let encoder = match arch {
            Architecture::SdpLstm { units } => SequenceEncoder::BiLstm {
                forward: LstmParams::zeros(token_dim, units),
                backward: LstmParams::zeros(token_dim, units),
            },
            Architecture::ConcatMlp { max_len } => SequenceEncoder::Concat { max_len, token_dim },
            Architecture::Rnn { units } => SequenceEncoder::Rnn(RnnParams::zeros(token_dim, units)),
        };
        let head = MlpHead::zeros(encoder.output_dim(), head.hidden, head.depth, LABELS, head.activation);
        ModelParams { encoder, head }
    }

    pub fn zeros_like(&self) -> Self {
        let encoder = self.encoder.zeros_like();
        let h = &self.head;
        let hidden = h.hidden.first().map_or(0, |l| l.b.len());
        ModelParams {
            head: MlpHead::zeros(encoder.output_dim(), hidden, h.depth(), LABELS, h.activation),
            encoder,
        }
    }

    pub fn token_dim(&self) -> usize {
        self.encoder.token_dim()
    }

    /// Dimension of the sequence summary fed to the head.
    pub fn summary_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.head.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let ModelParams { encoder, head } = self;
        let mut t = encoder.tensors_mut();
        t.extend(head.tensors_mut());
        t
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Adds `other` scaled by `scale` into `self` (same layout).
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }

    fn check_input<X: AsRef<[f64]>>(&self, xs: &[X]) -> Result<(), NeuralError> {
        if xs.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        let dim = self.token_dim();
        for x in xs {
            let x = x.as_ref();
            if x.len() != dim {
                return Err(NeuralError::DimensionMismatch {
                    what: "token vector",
                    expected: dim,
                    found: x.len(),
                });
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(NeuralError::NonFiniteInput);
            }
        }
        Ok(())
    }

    /// Forward pass. With `masks` the dropout masks are applied (training);
    /// without, the network runs in evaluation mode.
    pub fn forward<X: AsRef<[f64]>>(&self, xs: &[X], masks: Option<&DropoutMasks>) -> Result<ForwardPass, NeuralError> {
        self.check_input(xs)?;
        let (encoder, pooled) = match &self.encoder {
            SequenceEncoder::BiLstm { forward, backward } => {
                let fwd = forward.run(xs.iter());
                let bwd = backward.run(xs.iter().rev());
                let states = bilstm_states(&fwd, &bwd);
                let (pooled, argmax) = max_pool_with_argmax(&states)?;
                (
                    EncoderCache::BiLstm {
                        forward: fwd,
                        backward: bwd,
                        argmax,
                    },
                    pooled,
                )
            }
            SequenceEncoder::Concat { max_len, token_dim } => {
                let mut s = vec![0.0; max_len * token_dim];
                for (k, x) in xs.iter().take(*max_len).enumerate() {
                    s[k * token_dim..(k + 1) * token_dim].copy_from_slice(x.as_ref());
                }
                (EncoderCache::Concat, s)
            }
            SequenceEncoder::Rnn(p) => {
                let steps = p.run(xs);
                let s = steps.last().unwrap().h.clone();
                (EncoderCache::Rnn(steps), s)
            }
        };

        let pooled_mask = masks.map(|m| m.pooled.clone());
        let head_in = match &pooled_mask {
            Some(m) => {
                if m.len() != pooled.len() {
                    return Err(NeuralError::DimensionMismatch {
                        what: "pooled dropout mask",
                        expected: pooled.len(),
                        found: m.len(),
                    });
                }
                pooled.iter().zip(m).map(|(a, b)| a * b).collect()
            }
            None => pooled.clone(),
        };
        let head = self.head.forward(head_in, masks.map(|m| m.hidden.as_slice()));
        Ok(ForwardPass {
            len: xs.len(),
            encoder,
            pooled,
            pooled_mask,
            head,
        })
    }

    /// Backpropagates the cross-entropy loss of `label`, multiplied by
    /// `scale`, accumulating into `grads`. Returns the gradient with respect
    /// to every input token vector.
    pub fn backward(
        &self,
        pass: &ForwardPass,
        label: usize,
        scale: f64,
        grads: &mut Gradients,
    ) -> Result<Vec<Vec<f64>>, NeuralError> {
        let d_logits: Vec<f64> = pass
            .head
            .probs
            .iter()
            .enumerate()
            .map(|(c, p)| scale * (p - if c == label { 1.0 } else { 0.0 }))
            .collect();

        let mut d_pooled = self.head.backward(&pass.head, &d_logits, &mut grads.head);
        if let Some(m) = &pass.pooled_mask {
            for (d, k) in d_pooled.iter_mut().zip(m) {
                *d *= k;
            }
        }

        let token_dim = self.token_dim();
        let dxs = match (&self.encoder, &pass.encoder, &mut grads.encoder) {
            (
                SequenceEncoder::BiLstm { forward, backward },
                EncoderCache::BiLstm {
                    forward: fwd,
                    backward: bwd,
                    argmax,
                },
                SequenceEncoder::BiLstm {
                    forward: g_fwd,
                    backward: g_bwd,
                },
            ) => {
                let units = forward.units();
                let n = pass.len;
                let mut dh_f = vec![vec![0.0; units]; n];
                let mut dh_b = vec![vec![0.0; units]; n];
                for (j, &k) in argmax.iter().enumerate() {
                    if j < units {
                        dh_f[k][j] += d_pooled[j];
                    } else {
                        // backward step index of sequence position k
                        dh_b[n - 1 - k][j - units] += d_pooled[j];
                    }
                }
                let dx_f = forward.backward(fwd, &dh_f, g_fwd);
                let dx_b = backward.backward(bwd, &dh_b, g_bwd);
                (0..n)
                    .map(|k| dx_f[k].iter().zip(&dx_b[n - 1 - k]).map(|(a, b)| a + b).collect())
                    .collect()
            }
            (SequenceEncoder::Concat { max_len, .. }, EncoderCache::Concat, _) => (0..pass.len)
                .map(|k| {
                    if k < *max_len {
                        d_pooled[k * token_dim..(k + 1) * token_dim].to_vec()
                    } else {
                        vec![0.0; token_dim]
                    }
                })
                .collect(),
            (SequenceEncoder::Rnn(p), EncoderCache::Rnn(steps), SequenceEncoder::Rnn(g)) => {
                p.backward(steps, &d_pooled, g)
            }
            _ => {
                return Err(NeuralError::ShapeMismatch(
                    "gradient buffer does not match the model architecture".into(),
                ))
            }
        };

        if !grads.is_finite() {
            return Err(NeuralError::NonFiniteGradient);
        }
        Ok(dxs)
    }

    /// Evaluation-mode loss of a single instance.
    pub fn loss<X: AsRef<[f64]>>(&self, xs: &[X], label: usize) -> Result<f64, NeuralError> {
        Ok(self.forward(xs, None)?.loss(label))
    }
}

/// Aligns forward and backward hidden states: `z_k = [→h_k ; ←h_k]`.
fn bilstm_states(fwd: &[StepCache], bwd: &[StepCache]) -> Vec<Vec<f64>> {
    let n = fwd.len();
    (0..n)
        .map(|k| {
            let mut z = fwd[k].h.clone();
            z.extend_from_slice(&bwd[n - 1 - k].h);
            z
        })
        .collect()
}

/// Per-position Bi-LSTM states of a sequence (evaluation mode).
pub fn bilstm_forward<X: AsRef<[f64]>>(m: &ModelParams, seq: &[X]) -> Result<Vec<Vec<f64>>, NeuralError> {
    m.check_input(seq)?;
    match &m.encoder {
        SequenceEncoder::BiLstm { forward, backward } => {
            let fwd = forward.run(seq.iter());
            let bwd = backward.run(seq.iter().rev());
            Ok(bilstm_states(&fwd, &bwd))
        }
        _ => Err(NeuralError::ShapeMismatch("model has no Bi-LSTM encoder".into())),
    }
}

/// Coordinate-wise maximum with the winning position per coordinate; ties
/// go to the lowest position.
pub fn max_pool_with_argmax(states: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<usize>), NeuralError> {
    let first = states.first().ok_or(NeuralError::EmptySequence)?;
    let mut pooled = first.clone();
    let mut argmax = vec![0; first.len()];
    for (k, z) in states.iter().enumerate().skip(1) {
        for (j, &v) in z.iter().enumerate() {
            if v > pooled[j] {
                pooled[j] = v;
                argmax[j] = k;
            }
        }
    }
    Ok((pooled, argmax))
}

pub fn max_pool(states: &[Vec<f64>]) -> Result<Vec<f64>, NeuralError> {
    max_pool_with_argmax(states).map(|(p, _)| p)
}

/// `(M, T, probs)`: last hidden layer, logits and class probabilities.
pub type HeadOutputs = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Head outputs for a sequence summary `S`.
pub fn mlp_head(m: &ModelParams, s: &[f64]) -> Result<HeadOutputs, NeuralError> {
    if s.len() != m.head.input_dim() {
        return Err(NeuralError::DimensionMismatch {
            what: "sequence summary",
            expected: m.head.input_dim(),
            found: s.len(),
        });
    }
    let c = m.head.forward(s.to_vec(), None);
    let hidden = c.activations.first().cloned().unwrap_or_default();
    Ok((hidden, c.logits, c.probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::linalg::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    fn small_head() -> HeadShape {
        HeadShape {
            hidden: 5,
            depth: 1,
            activation: Activation::Sigmoid,
        }
    }

    #[test]
    fn zero_model_is_uniform_and_silent() {
        let m = ModelParams::zeros(Architecture::SdpLstm { units: 4 }, 3, small_head());
        let xs = vec![vec![1.0, 2.0, 3.0], vec![-4.0, 0.0, 1.0]];
        let z = bilstm_forward(&m, &xs).unwrap();
        assert!(z.iter().flatten().all(|&v| v == 0.0));
        let pass = m.forward(&xs, None).unwrap();
        assert_eq!(pass.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn length_one_sequence_sees_one_step_each_way() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = ModelParams::init(Architecture::SdpLstm { units: 3 }, 4, small_head(), &mut rng);
        let xs = seq(&mut rng, 1, 4);
        let z = bilstm_forward(&m, &xs).unwrap();
        let SequenceEncoder::BiLstm { forward, backward } = &m.encoder else {
            unreachable!()
        };
        let f = forward.step(&xs[0], &[0.0; 3], &[0.0; 3]).h;
        let b = backward.step(&xs[0], &[0.0; 3], &[0.0; 3]).h;
        assert_eq!(z[0], [f, b].concat());
    }

    #[test]
    fn palindrome_with_tied_directions_mirrors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut m = ModelParams::init(Architecture::SdpLstm { units: 4 }, 3, small_head(), &mut rng);
        if let SequenceEncoder::BiLstm { forward, backward } = &mut m.encoder {
            *backward = forward.clone();
        }
        let half = seq(&mut rng, 3, 3);
        let xs: Vec<Vec<f64>> = half.iter().chain(half.iter().rev().skip(1)).cloned().collect();
        let z = bilstm_forward(&m, &xs).unwrap();
        let n = xs.len();
        for k in 0..n {
            let mirrored = &z[n - 1 - k];
            for j in 0..4 {
                assert!((z[k][j] - mirrored[4 + j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn max_pool_examples() {
        let s = max_pool(&[vec![1.0, -2.0], vec![0.0, 5.0]]).unwrap();
        assert_eq!(s, vec![1.0, 5.0]);
        assert_eq!(max_pool(&[vec![3.0, 4.0]]).unwrap(), vec![3.0, 4.0]);
        assert!(matches!(max_pool(&[]), Err(NeuralError::EmptySequence)));

        let (_, arg) = max_pool_with_argmax(&[vec![1.0, 0.0], vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(arg, vec![0, 1]);
    }

    #[test]
    fn tied_max_routes_gradient_to_lowest_index() {
        // identical tokens, no recurrence and no memory: every position
        // produces the same state, so every coordinate ties
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut m = ModelParams::init(Architecture::SdpLstm { units: 2 }, 2, small_head(), &mut rng);
        if let SequenceEncoder::BiLstm { forward, backward } = &mut m.encoder {
            for p in [forward, backward] {
                for g in [&mut p.input, &mut p.forget, &mut p.output, &mut p.update] {
                    g.w_hidden = Matrix::zeros(2, 2);
                }
                // no memory carry-over either
                p.forget.bias = vec![-1e3; 2];
                p.forget.w_input = Matrix::zeros(2, 2);
            }
        }
        let xs = vec![vec![0.4, -0.3]; 3];
        let pass = m.forward(&xs, None).unwrap();
        let mut g = m.zeros_like();
        let dx = m.backward(&pass, 1, 1.0, &mut g).unwrap();
        assert!(dx[0].iter().any(|&v| v != 0.0));
        assert!(dx[1].iter().all(|&v| v == 0.0));
        assert!(dx[2].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mlp_head_shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = ModelParams::init(Architecture::SdpLstm { units: 3 }, 2, small_head(), &mut rng);
        let s: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (hidden, t, probs) = mlp_head(&m, &s).unwrap();
        assert_eq!(hidden.len(), 5);
        assert_eq!(t.len(), 2);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted = crate::neural::activation::softmax(&[t[0] + 7.5, t[1] + 7.5]);
        for (a, b) in probs.iter().zip(&shifted) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            mlp_head(&m, &[0.0; 5]),
            Err(NeuralError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn concat_pads_and_truncates() {
        let m = ModelParams::zeros(Architecture::ConcatMlp { max_len: 3 }, 2, small_head());
        assert_eq!(m.summary_dim(), 6);
        let pass = m.forward(&[vec![1.0, 2.0]], None).unwrap();
        assert_eq!(pass.pooled(), &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let long: Vec<Vec<f64>> = (0..5).map(|k| vec![k as f64; 2]).collect();
        let pass = m.forward(&long, None).unwrap();
        assert_eq!(pass.pooled(), &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn zero_output_weights_zero_hidden_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut m = ModelParams::init(Architecture::SdpLstm { units: 3 }, 4, small_head(), &mut rng);
        m.head.out = Matrix::zeros(2, 5);
        let xs = seq(&mut rng, 4, 4);
        let pass = m.forward(&xs, None).unwrap();
        let mut g = m.zeros_like();
        m.backward(&pass, 1, 1.0, &mut g).unwrap();
        assert!(g.head.hidden[0].w.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_sequences() {
        let m = ModelParams::zeros(Architecture::Rnn { units: 2 }, 3, small_head());
        let empty: Vec<Vec<f64>> = vec![];
        assert!(matches!(m.forward(&empty, None), Err(NeuralError::EmptySequence)));
        assert!(matches!(
            m.forward(&[vec![0.0; 2]], None),
            Err(NeuralError::DimensionMismatch { .. })
        ));
    }
}
