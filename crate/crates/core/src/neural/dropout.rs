//! Inverted dropout masks.

use rand::Rng;

use super::NeuralError;

/// Each component is 0 with probability `rate`, else `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(dim: usize, rate: f64, rng: &mut R) -> Result<Vec<f64>, NeuralError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NeuralError::BadRate(rate));
    }
    if rate == 0.0 {
        return Ok(vec![1.0; dim]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..dim)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect())
}

/// Training-time masks for the pooled vector and each head hidden layer.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMasks {
    pub pooled: Vec<f64>,
    pub hidden: Vec<Vec<f64>>,
}
