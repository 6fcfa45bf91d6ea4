//! LSTM cell with explicit forward cache and backpropagation through time.
//!
//! ```text
//! i = σ(W1ᵢ x + W2ᵢ h₋ + bᵢ)      f = σ(W1_f x + W2_f h₋ + b_f)
//! o = σ(W1ₒ x + W2ₒ h₋ + bₒ)      u = tanh(W1ᵤ x + W2ᵤ h₋ + bᵤ)
//! c = i ⊙ u + f ⊙ c₋              h = o ⊙ tanh(c)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::sigmoid;
use super::linalg::Matrix;
use super::NeuralError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    /// units × input_dim
    pub w_input: Matrix,
    /// units × units
    pub w_hidden: Matrix,
    pub bias: Vec<f64>,
}

impl Gate {
    fn zeros(input_dim: usize, units: usize) -> Self {
        Gate {
            w_input: Matrix::zeros(units, input_dim),
            w_hidden: Matrix::zeros(units, units),
            bias: vec![0.0; units],
        }
    }

    fn init<R: Rng + ?Sized>(input_dim: usize, units: usize, bias: f64, rng: &mut R) -> Self {
        Gate {
            w_input: Matrix::glorot(units, input_dim, rng),
            w_hidden: Matrix::glorot(units, units, rng),
            bias: vec![bias; units],
        }
    }

    fn pre_activation(&self, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
        let mut z = self.bias.clone();
        self.w_input.mul_vec_add(x, &mut z);
        self.w_hidden.mul_vec_add(h_prev, &mut z);
        z
    }

    fn tensors(&self) -> [&[f64]; 3] {
        [self.w_input.as_slice(), self.w_hidden.as_slice(), &self.bias]
    }

    fn tensors_mut(&mut self) -> [&mut [f64]; 3] {
        [
            self.w_input.as_mut_slice(),
            self.w_hidden.as_mut_slice(),
            &mut self.bias,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub input: Gate,
    pub forget: Gate,
    pub output: Gate,
    pub update: Gate,
}

/// Everything a single step needs for its backward pass.
#[derive(Clone, Debug)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub u: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, units: usize) -> Self {
        LstmParams {
            input: Gate::zeros(input_dim, units),
            forget: Gate::zeros(input_dim, units),
            output: Gate::zeros(input_dim, units),
            update: Gate::zeros(input_dim, units),
        }
    }

    /// Glorot weights, zero biases except the forget gate bias of 1.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, units: usize, rng: &mut R) -> Self {
        LstmParams {
            input: Gate::init(input_dim, units, 0.0, rng),
            forget: Gate::init(input_dim, units, 1.0, rng),
            output: Gate::init(input_dim, units, 0.0, rng),
            update: Gate::init(input_dim, units, 0.0, rng),
        }
    }

    pub fn units(&self) -> usize {
        self.input.bias.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input.w_input.cols()
    }

    fn gates(&self) -> [&Gate; 4] {
        [&self.input, &self.forget, &self.output, &self.update]
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        self.gates().into_iter().flat_map(Gate::tensors).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let LstmParams {
            input,
            forget,
            output,
            update,
        } = self;
        let mut out = Vec::with_capacity(12);
        for g in [input, forget, output, update] {
            out.extend(g.tensors_mut());
        }
        out
    }

    /// One forward step, keeping the intermediates.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
        let i: Vec<f64> = self.input.pre_activation(x, h_prev).into_iter().map(sigmoid).collect();
        let f: Vec<f64> = self.forget.pre_activation(x, h_prev).into_iter().map(sigmoid).collect();
        let o: Vec<f64> = self.output.pre_activation(x, h_prev).into_iter().map(sigmoid).collect();
        let u: Vec<f64> = self
            .update
            .pre_activation(x, h_prev)
            .into_iter()
            .map(f64::tanh)
            .collect();

        let c: Vec<f64> = (0..u.len()).map(|k| i[k] * u[k] + f[k] * c_prev[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = o.iter().zip(&tanh_c).map(|(a, b)| a * b).collect();

        StepCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            i,
            f,
            o,
            u,
            c,
            tanh_c,
            h,
        }
    }

    /// Runs the cell over `xs` from a zero state, returning every step.
    pub fn run<X: AsRef<[f64]>>(&self, xs: impl Iterator<Item = X>) -> Vec<StepCache> {
        let units = self.units();
        let mut h = vec![0.0; units];
        let mut c = vec![0.0; units];
        let mut steps = Vec::new();
        for x in xs {
            let s = self.step(x.as_ref(), &h, &c);
            h.clone_from(&s.h);
            c.clone_from(&s.c);
            steps.push(s);
        }
        steps
    }

    /// Backpropagation through time. `dh[k]` is the loss gradient arriving
    /// at the hidden output of step `k` from outside the recurrence.
    /// Accumulates parameter gradients into `grads` and returns the input
    /// gradients per step.
    pub fn backward(&self, steps: &[StepCache], dh: &[Vec<f64>], grads: &mut LstmParams) -> Vec<Vec<f64>> {
        let units = self.units();
        let mut dh_next = vec![0.0; units];
        let mut dc_next = vec![0.0; units];
        let mut dxs = vec![Vec::new(); steps.len()];

        for k in (0..steps.len()).rev() {
            let s = &steps[k];
            let mut d_i = vec![0.0; units];
            let mut d_f = vec![0.0; units];
            let mut d_o = vec![0.0; units];
            let mut d_u = vec![0.0; units];
            for j in 0..units {
                let dh_total = dh[k][j] + dh_next[j];
                let dc = dc_next[j] + dh_total * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
                d_o[j] = dh_total * s.tanh_c[j] * s.o[j] * (1.0 - s.o[j]);
                d_i[j] = dc * s.u[j] * s.i[j] * (1.0 - s.i[j]);
                d_f[j] = dc * s.c_prev[j] * s.f[j] * (1.0 - s.f[j]);
                d_u[j] = dc * s.i[j] * (1.0 - s.u[j] * s.u[j]);
                dc_next[j] = dc * s.f[j];
            }

            let mut dx = vec![0.0; s.x.len()];
            let mut dh_prev = vec![0.0; units];
            let pairs = [
                (&self.input, &mut grads.input, &d_i),
                (&self.forget, &mut grads.forget, &d_f),
                (&self.output, &mut grads.output, &d_o),
                (&self.update, &mut grads.update, &d_u),
            ];
            for (gate, grad, delta) in pairs {
                grad.w_input.add_outer(delta, &s.x);
                grad.w_hidden.add_outer(delta, &s.h_prev);
                for (b, d) in grad.bias.iter_mut().zip(delta.iter()) {
                    *b += d;
                }
                gate.w_input.tr_mul_vec_add(delta, &mut dx);
                gate.w_hidden.tr_mul_vec_add(delta, &mut dh_prev);
            }
            dh_next = dh_prev;
            dxs[k] = dx;
        }
        dxs
    }
}

/// Single cell evaluation with dimension and finiteness checks.
pub fn lstm_cell(
    p: &LstmParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), NeuralError> {
    let units = p.units();
    for (what, got, want) in [
        ("input", x.len(), p.input_dim()),
        ("hidden state", h_prev.len(), units),
        ("cell state", c_prev.len(), units),
    ] {
        if got != want {
            return Err(NeuralError::DimensionMismatch {
                what,
                expected: want,
                found: got,
            });
        }
    }
    if !x.iter().chain(h_prev).chain(c_prev).all(|v| v.is_finite()) {
        return Err(NeuralError::NonFiniteInput);
    }
    let s = p.step(x, h_prev, c_prev);
    Ok((s.h, s.c))
}
