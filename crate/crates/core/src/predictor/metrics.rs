use alloc::vec::Vec;

/// Confusion counts and the derived scores. Every 0/0 ratio is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(true_pos: usize, false_pos: usize, false_neg: usize, true_neg: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(true_pos, true_pos + false_pos);
        let recall = ratio(true_pos, true_pos + false_neg);
        // 2pr/(p+r) on counts is 2tp/(2tp+fp+fn)
        let f1 = ratio(2 * true_pos, 2 * true_pos + false_pos + false_neg);
        Metrics { true_pos, false_pos, false_neg, true_neg, precision, recall, f1 }
    }

    /// Predicts positive iff `prob >= threshold`.
    pub fn from_predictions(probs: &[f64], labels: &[bool], threshold: f64) -> Self {
        let (mut tp, mut fp, mut fneg, mut tn) = (0, 0, 0, 0);
        for (&p, &y) in probs.iter().zip(labels) {
            match (p >= threshold, y) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                (false, false) => tn += 1,
            }
        }
        Self::from_counts(tp, fp, fneg, tn)
    }
}

/// Metrics at each threshold, for diagnostics.
pub fn threshold_sweep(probs: &[f64], labels: &[bool], thresholds: &[f64]) -> Vec<Metrics> {
    thresholds.iter().map(|&t| Metrics::from_predictions(probs, labels, t)).collect()
}
