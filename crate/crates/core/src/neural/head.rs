//! Fully connected classifier head: `M = f(W_M S + b_M)`, `T = W_T M`,
//! `probs = softmax(T)`. Hidden depth is configurable; the output
//! projection has no bias.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::{softmax, Activation};
use super::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub w: Matrix,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpHead {
    pub hidden: Vec<Dense>,
    /// labels × last hidden size
    pub out: Matrix,
    pub activation: Activation,
}

#[derive(Clone, Debug)]
pub struct HeadCache {
    /// Input of every hidden layer after dropout; `inputs[0]` is the masked S.
    pub inputs: Vec<Vec<f64>>,
    /// Activation output of each hidden layer before dropout.
    pub activations: Vec<Vec<f64>>,
    pub masks: Vec<Option<Vec<f64>>>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl HeadCache {
    /// Hidden output of the first layer (`M`).
    pub fn hidden_output(&self) -> &[f64] {
        &self.activations[0]
    }
}

impl MlpHead {
    pub fn zeros(input_dim: usize, hidden: usize, depth: usize, labels: usize, activation: Activation) -> Self {
        let mut layers = Vec::with_capacity(depth);
        let mut fan_in = input_dim;
        for _ in 0..depth {
            layers.push(Dense {
                w: Matrix::zeros(hidden, fan_in),
                b: vec![0.0; hidden],
            });
            fan_in = hidden;
        }
        MlpHead {
            hidden: layers,
            out: Matrix::zeros(labels, fan_in),
            activation,
        }
    }

    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: usize,
        depth: usize,
        labels: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let mut layers = Vec::with_capacity(depth);
        let mut fan_in = input_dim;
        for _ in 0..depth {
            layers.push(Dense {
                w: Matrix::glorot(hidden, fan_in, rng),
                b: vec![0.0; hidden],
            });
            fan_in = hidden;
        }
        MlpHead {
            hidden: layers,
            out: Matrix::glorot(labels, fan_in, rng),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.first().map_or(self.out.cols(), |l| l.w.cols())
    }

    pub fn depth(&self) -> usize {
        self.hidden.len()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut t: Vec<&[f64]> = Vec::new();
        for l in &self.hidden {
            t.push(l.w.as_slice());
            t.push(&l.b);
        }
        t.push(self.out.as_slice());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.hidden {
            t.push(l.w.as_mut_slice());
            t.push(&mut l.b);
        }
        t.push(self.out.as_mut_slice());
        t
    }

    /// `s` must already carry its dropout mask; `masks[l]` is applied to the
    /// output of hidden layer `l`.
    pub fn forward(&self, s: Vec<f64>, masks: Option<&[Vec<f64>]>) -> HeadCache {
        let mut inputs = vec![s];
        let mut activations = Vec::with_capacity(self.hidden.len());
        let mut applied = Vec::with_capacity(self.hidden.len());
        for (l, layer) in self.hidden.iter().enumerate() {
            let mut pre = layer.b.clone();
            layer.w.mul_vec_add(inputs.last().unwrap(), &mut pre);
            let act: Vec<f64> = pre.into_iter().map(|z| self.activation.apply(z)).collect();
            let mask = masks.map(|m| m[l].clone());
            let next = match &mask {
                Some(m) => act.iter().zip(m).map(|(a, k)| a * k).collect(),
                None => act.clone(),
            };
            activations.push(act);
            applied.push(mask);
            inputs.push(next);
        }
        let logits = self.out.mul_vec(inputs.last().unwrap());
        let probs = softmax(&logits);
        HeadCache {
            inputs,
            activations,
            masks: applied,
            logits,
            probs,
        }
    }

    /// Backward from the logit gradient; returns the gradient with respect
    /// to the (masked) head input.
    pub fn backward(&self, cache: &HeadCache, d_logits: &[f64], grads: &mut MlpHead) -> Vec<f64> {
        let last = cache.inputs.last().unwrap();
        grads.out.add_outer(d_logits, last);
        let mut d = vec![0.0; last.len()];
        self.out.tr_mul_vec_add(d_logits, &mut d);

        for l in (0..self.hidden.len()).rev() {
            let act = &cache.activations[l];
            let delta: Vec<f64> = (0..act.len())
                .map(|j| {
                    let dm = match &cache.masks[l] {
                        Some(m) => d[j] * m[j],
                        None => d[j],
                    };
                    dm * self.activation.derivative_from_output(act[j])
                })
                .collect();
            grads.hidden[l].w.add_outer(&delta, &cache.inputs[l]);
            for (b, v) in grads.hidden[l].b.iter_mut().zip(&delta) {
                *b += v;
            }
            let mut d_in = vec![0.0; cache.inputs[l].len()];
            self.hidden[l].w.tr_mul_vec_add(&delta, &mut d_in);
            d = d_in;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_head_is_uniform() {
        let head = MlpHead::zeros(6, 4, 1, 2, Activation::Sigmoid);
        let c = head.forward(vec![1.0, -3.0, 2.0, 0.0, 5.0, 1.0], None);
        assert_eq!(c.probs, vec![0.5, 0.5]);
        assert!(c.hidden_output().iter().all(|&m| m == 0.5));
    }

    #[test]
    fn probs_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for depth in 1..4 {
            let head = MlpHead::init(10, 7, depth, 2, Activation::Sigmoid, &mut rng);
            let s: Vec<f64> = (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let c = head.forward(s, None);
            assert!((c.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(c.activations.len(), depth);
        }
    }

    #[test]
    fn zero_output_weights_block_hidden_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut head = MlpHead::init(5, 3, 1, 2, Activation::Sigmoid, &mut rng);
        head.out = Matrix::zeros(2, 3);
        let c = head.forward(vec![0.1, 0.2, 0.3, 0.4, 0.5], None);
        let mut g = MlpHead::zeros(5, 3, 1, 2, Activation::Sigmoid);
        let d = head.backward(&c, &[0.5, -0.5], &mut g);
        assert!(g.hidden[0].w.as_slice().iter().all(|&v| v == 0.0));
        assert!(d.iter().all(|&v| v == 0.0));
        assert!(g.out.as_slice().iter().any(|&v| v != 0.0));
    }
}
