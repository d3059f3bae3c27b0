use alloc::format;

use crate::error::{Error, Result};

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before the log.
pub const PROB_EPS: f64 = 1e-12;

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn bce_term(p: f64, label: bool) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    if label {
        -libm::log(p)
    } else {
        -libm::log(1.0 - p)
    }
}

/// Mean binary cross-entropy.
pub fn bce_loss(probs: &[f64], labels: &[bool]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::config("cross-entropy of an empty batch"));
    }
    if probs.len() != labels.len() {
        return Err(Error::shape(format!("{} probabilities for {} labels", probs.len(), labels.len())));
    }
    let sum: f64 = probs.iter().zip(labels).map(|(&p, &y)| bce_term(p, y)).sum();
    Ok(sum / probs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        assert!((bce_loss(&[0.5], &[true]).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_loss(&[1.0 - PROB_EPS], &[true]).unwrap() < 1e-11);
        let v = bce_loss(&[0.9, 0.1], &[true, false]).unwrap();
        assert!((v - 0.105_360_515_657_826_3).abs() < 1e-12);
        // saturated inputs stay finite
        assert!(bce_loss(&[0.0, 1.0], &[true, false]).unwrap().is_finite());
    }

    #[test]
    fn empty_or_ragged_input() {
        assert!(matches!(bce_loss(&[], &[]), Err(Error::Config(_))));
        assert!(matches!(bce_loss(&[0.5], &[true, false]), Err(Error::Shape(_))));
    }

    #[test]
    fn sigmoid_is_symmetric_and_bounded() {
        for z in [-40.0, -3.0, 0.0, 2.5, 40.0] {
            let s = sigmoid(z);
            assert!((s + sigmoid(-z) - 1.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&s));
        }
        assert_eq!(sigmoid(0.0), 0.5);
    }
}
