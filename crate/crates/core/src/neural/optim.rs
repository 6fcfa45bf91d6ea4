//! First-order optimizers over lists of parameter tensors.
//!
//! Accumulators are created lazily on the first step with the shapes of the
//! supplied tensors; every later step must present the same shapes.

use serde::{Deserialize, Serialize};

use super::NeuralError;

fn check_shapes(state: &[Vec<f64>], params: &[&mut [f64]], grads: &[&[f64]]) -> Result<(), NeuralError> {
    if params.len() != grads.len() {
        return Err(NeuralError::ShapeMismatch(format!(
            "{} parameter tensors but {} gradient tensors",
            params.len(),
            grads.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() {
            return Err(NeuralError::ShapeMismatch(format!(
                "tensor {i}: parameter length {} vs gradient length {}",
                p.len(),
                g.len()
            )));
        }
    }
    if !state.is_empty() {
        if state.len() != params.len() {
            return Err(NeuralError::ShapeMismatch(format!(
                "optimizer tracks {} tensors, got {}",
                state.len(),
                params.len()
            )));
        }
        for (i, (s, p)) in state.iter().zip(params).enumerate() {
            if s.len() != p.len() {
                return Err(NeuralError::ShapeMismatch(format!(
                    "tensor {i}: accumulator length {} vs parameter length {}",
                    s.len(),
                    p.len()
                )));
            }
        }
    }
    Ok(())
}

fn zeros_like(params: &[&mut [f64]]) -> Vec<Vec<f64>> {
    params.iter().map(|p| vec![0.0; p.len()]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Default for Adam {
    fn default() -> Self {
        Adam::new(0.001)
    }
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NeuralError> {
        check_shapes(&self.m, params, grads)?;
        if self.m.is_empty() {
            self.m = zeros_like(params);
            self.v = zeros_like(params);
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (ti, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.m[ti];
            let v = &mut self.v[ti];
            for j in 0..p.len() {
                let gj = g[j];
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * gj;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * gj * gj;
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                p[j] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adadelta {
    pub rho: f64,
    pub eps: f64,
    pub lr: f64,
    pub step: u64,
    sq_grad: Vec<Vec<f64>>,
    sq_update: Vec<Vec<f64>>,
}

impl Default for Adadelta {
    fn default() -> Self {
        Adadelta {
            rho: 0.95,
            eps: 1e-6,
            lr: 1.0,
            step: 0,
            sq_grad: Vec::new(),
            sq_update: Vec::new(),
        }
    }
}

impl Adadelta {
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NeuralError> {
        self.step_with_updates(params, grads).map(|_| ())
    }

    /// Same as [`Adadelta::step`] but returns the applied updates.
    pub fn step_with_updates(
        &mut self,
        params: &mut [&mut [f64]],
        grads: &[&[f64]],
    ) -> Result<Vec<Vec<f64>>, NeuralError> {
        check_shapes(&self.sq_grad, params, grads)?;
        if self.sq_grad.is_empty() {
            self.sq_grad = zeros_like(params);
            self.sq_update = zeros_like(params);
        }
        self.step += 1;
        let mut applied = Vec::with_capacity(params.len());
        for (ti, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let eg = &mut self.sq_grad[ti];
            let ex = &mut self.sq_update[ti];
            let mut upd = vec![0.0; p.len()];
            for j in 0..p.len() {
                let gj = g[j];
                eg[j] = self.rho * eg[j] + (1.0 - self.rho) * gj * gj;
                let delta = -((ex[j] + self.eps).sqrt() / (eg[j] + self.eps).sqrt()) * gj;
                ex[j] = self.rho * ex[j] + (1.0 - self.rho) * delta * delta;
                p[j] += self.lr * delta;
                upd[j] = self.lr * delta;
            }
            applied.push(upd);
        }
        Ok(applied)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut p = vec![1.0, -2.0, 3.0];
        let mut adam = Adam::default();
        for _ in 0..5 {
            adam.step(&mut [&mut p[..]], &[&[0.0, 0.0, 0.0][..]]).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        // m̂ = g and v̂ = g², so the step is -lr·g/(|g| + eps).
        let g = [0.5, -3.0, 1e-3];
        let mut p = [0.0; 3];
        let mut adam = Adam::default();
        adam.step(&mut [&mut p[..]], &[&g[..]]).unwrap();
        for (pj, gj) in p.iter().zip(g) {
            let expected = -0.001 * gj / (gj.abs() + 1e-8);
            assert!((pj - expected).abs() < 1e-15, "{pj} vs {expected}");
            assert!((pj.abs() - 0.001).abs() < 1e-8);
        }
    }

    #[test]
    fn adam_is_deterministic() {
        let run = || {
            let mut p = vec![0.3, -0.7];
            let mut adam = Adam::new(0.01);
            for k in 0..10 {
                let g = [(k as f64).sin(), (k as f64).cos()];
                adam.step(&mut [&mut p[..]], &[&g[..]]).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut p = [0.0; 3];
        let mut adam = Adam::default();
        assert!(matches!(
            adam.step(&mut [&mut p[..]], &[&[0.0, 1.0][..]]),
            Err(NeuralError::ShapeMismatch(_))
        ));
        adam.step(&mut [&mut p[..]], &[&[0.0; 3][..]]).unwrap();
        let mut q = [0.0; 4];
        assert!(matches!(
            adam.step(&mut [&mut q[..]], &[&[0.0; 4][..]]),
            Err(NeuralError::ShapeMismatch(_))
        ));
        let mut ada = Adadelta::default();
        assert!(matches!(
            ada.step(&mut [&mut p[..]], &[]),
            Err(NeuralError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn adadelta_zero_gradient_is_noop() {
        let mut p = vec![1.5, -0.5];
        let mut ada = Adadelta::default();
        for _ in 0..10 {
            ada.step(&mut [&mut p[..]], &[&[0.0, 0.0][..]]).unwrap();
        }
        assert_eq!(p, vec![1.5, -0.5]);
    }

    #[test]
    fn adadelta_constant_gradient_settles_at_gradient_magnitude() {
        // Fixed point of the accumulators under a constant gradient g is
        // E[g²] = E[Δx²] = g², so the step magnitude tends to |g|. The
        // contraction factor is 1 - (1-ρ)ε/(g²+ε), fast when g² ≪ ε.
        let g = 1e-4;
        let mut p = [0.0];
        let mut ada = Adadelta::default();
        let mut steps = Vec::new();
        for _ in 0..1000 {
            let u = ada.step_with_updates(&mut [&mut p[..]], &[&[g][..]]).unwrap();
            steps.push(u[0][0].abs());
        }
        let last = steps[999];
        assert!((last - g).abs() / g < 1e-6, "{last}");
        assert!((steps[999] - steps[998]).abs() < 1e-12);

        // large gradients approach |g| from below and never overshoot
        let mut p = [0.0];
        let mut ada = Adadelta::default();
        let mut prev = 0.0;
        for k in 0..1000 {
            let u = ada.step_with_updates(&mut [&mut p[..]], &[&[1.0][..]]).unwrap();
            let s = u[0][0].abs();
            assert!(s <= 1.0);
            if k > 20 {
                assert!(s >= prev);
            }
            prev = s;
        }
    }

    #[test]
    fn adadelta_is_deterministic() {
        let run = || {
            let mut p = vec![0.1, 0.2, 0.3];
            let mut ada = Adadelta::default();
            for k in 0..25 {
                let g = [k as f64 * 0.1, -1.0, 0.5];
                ada.step(&mut [&mut p[..]], &[&g[..]]).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }
}
