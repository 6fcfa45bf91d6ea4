/// Probabilities are clamped into this band before taking logs.
pub const PROB_CLAMP: f64 = 1e-12;

/// Binary cross-entropy of the positive-class probability.
pub fn cross_entropy(prob_positive: f64, positive: bool) -> f64 {
    let a = prob_positive.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if positive {
        -a.ln()
    } else {
        -(1.0 - a).ln()
    }
}

/// Mean loss over a batch of `(prob_positive, label)` pairs.
pub fn mean_cross_entropy(batch: &[(f64, bool)]) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    batch.iter().map(|&(p, l)| cross_entropy(p, l)).sum::<f64>() / batch.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let ln2 = std::f64::consts::LN_2;
        assert!((cross_entropy(0.5, true) - ln2).abs() < 1e-15);
        assert!((cross_entropy(0.5, false) - ln2).abs() < 1e-15);
        assert!(cross_entropy(1.0 - 1e-12, true) < 1e-11);
        assert!((cross_entropy(0.9, false) - std::f64::consts::LN_10).abs() < 1e-9);
        assert!(cross_entropy(0.0, true).is_finite());
        assert!(cross_entropy(1.0, false).is_finite());
        assert!((mean_cross_entropy(&[(0.5, true), (0.5, false)]) - ln2).abs() < 1e-15);
    }
}
