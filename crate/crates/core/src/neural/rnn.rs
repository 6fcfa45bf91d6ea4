//! Simple sigmoid recurrent encoder whose last hidden state summarizes the
//! sequence: `h_k = σ(U x_k + V h_{k-1} + b)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::sigmoid;
use super::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnnParams {
    /// units × input_dim
    pub u: Matrix,
    /// units × units
    pub v: Matrix,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RnnStep {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub h: Vec<f64>,
}

impl RnnParams {
    pub fn zeros(input_dim: usize, units: usize) -> Self {
        RnnParams {
            u: Matrix::zeros(units, input_dim),
            v: Matrix::zeros(units, units),
            b: vec![0.0; units],
        }
    }

    pub fn init<R: Rng + ?Sized>(input_dim: usize, units: usize, rng: &mut R) -> Self {
        RnnParams {
            u: Matrix::glorot(units, input_dim, rng),
            v: Matrix::glorot(units, units, rng),
            b: vec![0.0; units],
        }
    }

    pub fn units(&self) -> usize {
        self.b.len()
    }

    pub fn input_dim(&self) -> usize {
        self.u.cols()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        vec![self.u.as_slice(), self.v.as_slice(), &self.b]
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.u.as_mut_slice(), self.v.as_mut_slice(), &mut self.b]
    }

    pub fn run<X: AsRef<[f64]>>(&self, xs: &[X]) -> Vec<RnnStep> {
        let mut h = vec![0.0; self.units()];
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            let x = x.as_ref();
            let mut pre = self.b.clone();
            self.u.mul_vec_add(x, &mut pre);
            self.v.mul_vec_add(&h, &mut pre);
            let next: Vec<f64> = pre.into_iter().map(sigmoid).collect();
            steps.push(RnnStep {
                x: x.to_vec(),
                h_prev: std::mem::replace(&mut h, next.clone()),
                h: next,
            });
        }
        steps
    }

    /// Backward pass from a gradient on the final hidden state.
    pub fn backward(&self, steps: &[RnnStep], d_last: &[f64], grads: &mut RnnParams) -> Vec<Vec<f64>> {
        let mut dh = d_last.to_vec();
        let mut dxs = vec![Vec::new(); steps.len()];
        for k in (0..steps.len()).rev() {
            let s = &steps[k];
            let delta: Vec<f64> = dh.iter().zip(&s.h).map(|(d, h)| d * h * (1.0 - h)).collect();
            grads.u.add_outer(&delta, &s.x);
            grads.v.add_outer(&delta, &s.h_prev);
            for (b, d) in grads.b.iter_mut().zip(&delta) {
                *b += d;
            }
            let mut dx = vec![0.0; s.x.len()];
            self.u.tr_mul_vec_add(&delta, &mut dx);
            let mut dh_prev = vec![0.0; dh.len()];
            self.v.tr_mul_vec_add(&delta, &mut dh_prev);
            dxs[k] = dx;
            dh = dh_prev;
        }
        dxs
    }
}
