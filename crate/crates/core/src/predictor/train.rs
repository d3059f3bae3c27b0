use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Adam, Example, Metrics, Model};
use crate::error::{Error, Result};
use crate::gnn::GraphBundle;
use crate::graph::{sample_negative_pairs, LabeledPairSet, Split};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub threshold: f64,
    /// Negatives per positive.
    pub negative_ratio: f64,
    /// Redraw the training negatives at the start of every epoch after the first.
    pub resample_negatives: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-5,
            epochs: 4000,
            batch_size: 256,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            threshold: 0.5,
            negative_ratio: 1.0,
            resample_negatives: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{} must be positive and finite, got {}", name, v)))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("adam_eps", self.adam_eps)?;
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{} must lie in [0, 1), got {}", name, b)));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.negative_ratio >= 0.0 && self.negative_ratio.is_finite()) {
            return Err(Error::config(format!("negative_ratio must be >= 0, got {}", self.negative_ratio)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    /// Mean training loss of each epoch.
    pub loss_history: Vec<f64>,
}

/// Mini-batch Adam on the train split. Every step runs the full graph through
/// the GNN and scores one batch of pairs.
pub fn train(
    bundle: &GraphBundle,
    node_features: &Matrix,
    pairs: &LabeledPairSet,
    initial: Model,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut examples: Vec<Example> = pairs.split(Split::Train).map(|p| (p.source, p.target, p.label)).collect();
    if examples.is_empty() {
        return Err(Error::config("the train split is empty"));
    }
    let all_positives: Vec<(usize, usize)> =
        pairs.pairs.iter().filter(|p| p.label).map(|p| (p.source, p.target)).collect();
    let train_positives: Vec<(usize, usize)> =
        examples.iter().filter(|e| e.2).map(|&(p, q, _)| (p, q)).collect();

    let mut model = initial;
    let mut adam = Adam::new(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 1..=config.epochs {
        if config.resample_negatives && epoch > 1 {
            resample(bundle, &mut examples, &all_positives, &train_positives, config.seed, epoch)?;
        }
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batch = Vec::with_capacity(config.batch_size);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| examples[i]));
            let (loss, grads) = model.loss_and_gradients(bundle, node_features, &batch)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            sum += loss * batch.len() as f64;
            let g: Vec<&[f64]> = grads.model.tensors().into_iter().map(|(_, t)| t.data).collect();
            adam.step(model.tensors_mut(), g)?;
        }
        let mean = sum / examples.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { epoch, loss: mean });
        }
        history.push(mean);
    }
    Ok(TrainOutcome { model, loss_history: history })
}

fn resample(
    bundle: &GraphBundle,
    examples: &mut Vec<Example>,
    all_positives: &[(usize, usize)],
    train_positives: &[(usize, usize)],
    seed: u64,
    epoch: usize,
) -> Result<()> {
    let count = examples.iter().filter(|e| !e.2).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    let fresh = sample_negative_pairs(bundle.graph(), all_positives, train_positives, count, &mut rng)?;
    examples.retain(|e| e.2);
    examples.extend(fresh.into_iter().map(|(p, q)| (p, q, false)));
    Ok(())
}

/// Scores `examples` and thresholds at `threshold` (inclusive).
pub fn evaluate(
    model: &Model,
    bundle: &GraphBundle,
    node_features: &Matrix,
    examples: &[Example],
    threshold: f64,
) -> Result<Metrics> {
    if examples.is_empty() {
        return Err(Error::config("nothing to evaluate"));
    }
    let pairs: Vec<(usize, usize)> = examples.iter().map(|&(p, q, _)| (p, q)).collect();
    let labels: Vec<bool> = examples.iter().map(|e| e.2).collect();
    let probs = model.predict(bundle, node_features, &pairs)?;
    Ok(Metrics::from_predictions(&probs, &labels, threshold))
}
