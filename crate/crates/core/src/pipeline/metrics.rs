//! Confusion counts and precision / recall / F1 in percent.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl FoldMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let precision = percent(tp, tp + fp);
        let recall = percent(tp, tp + fn_);
        FoldMetrics {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }

    /// Counts `(gold, predicted)` label pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (gold, pred) in pairs {
            match (gold.is_positive(), pred.is_positive()) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        FoldMetrics::from_counts(tp, fp, fn_, tn)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        percent(self.tp + self.tn, self.total())
    }

    /// Micro-average: metrics of the summed confusion counts.
    pub fn pooled<'a>(folds: impl IntoIterator<Item = &'a FoldMetrics>) -> Self {
        let (tp, fp, fn_, tn) = folds.into_iter().fold((0, 0, 0, 0), |(a, b, c, d), m| {
            (a + m.tp, b + m.fp, c + m.fn_, d + m.tn)
        });
        FoldMetrics::from_counts(tp, fp, fn_, tn)
    }
}

/// Unweighted mean of per-fold metrics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MacroMetrics {
    pub fn of(folds: &[FoldMetrics]) -> Self {
        if folds.is_empty() {
            return MacroMetrics::default();
        }
        let n = folds.len() as f64;
        let mean = |f: fn(&FoldMetrics) -> f64| folds.iter().map(f).sum::<f64>() / n;
        MacroMetrics {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_counts() {
        let m = FoldMetrics::from_counts(41, 4, 9, 100);
        assert!((m.precision - 91.11).abs() < 0.01);
        assert!((m.recall - 82.00).abs() < 0.01);
        assert!((m.f1 - 86.32).abs() < 0.01);
    }

    #[test]
    fn f1_from_reported_precision_recall() {
        assert!((f1_score(91.10, 82.20) - 86.42).abs() < 0.05);
    }

    #[test]
    fn conventions() {
        let perfect = FoldMetrics::from_counts(5, 0, 0, 7);
        assert_eq!((perfect.precision, perfect.recall, perfect.f1), (100.0, 100.0, 100.0));
        let none = FoldMetrics::from_counts(0, 0, 3, 9);
        assert_eq!((none.precision, none.recall, none.f1), (0.0, 0.0, 0.0));
        let empty = FoldMetrics::from_counts(0, 0, 0, 0);
        assert_eq!(empty.f1, 0.0);
        assert_eq!(empty.accuracy(), 0.0);
    }

    #[test]
    fn pooling_sums_counts() {
        let a = FoldMetrics::from_counts(1, 2, 3, 4);
        let b = FoldMetrics::from_counts(10, 0, 5, 1);
        let p = FoldMetrics::pooled([&a, &b]);
        assert_eq!((p.tp, p.fp, p.fn_, p.tn), (11, 2, 8, 5));
        let mac = MacroMetrics::of(&[a, b]);
        assert!((mac.precision - (a.precision + b.precision) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn from_pairs_counts_each_cell() {
        use Label::*;
        let m = FoldMetrics::from_pairs([
            (Interacting, Interacting),
            (Interacting, NonInteracting),
            (NonInteracting, Interacting),
            (NonInteracting, NonInteracting),
            (NonInteracting, NonInteracting),
        ]);
        assert_eq!((m.tp, m.fn_, m.fp, m.tn), (1, 1, 1, 2));
    }
}
