//! Siamese link scoring, loss, optimization and evaluation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gnn::{backward_cached, forward_cached, push_dense, push_dense_mut, GnnConfig, GraphBundle, ModelState, TensorView};
use crate::matrix::Matrix;

mod adam;
mod loss;
mod metrics;
mod siamese;
mod train;

pub use adam::Adam;
pub use loss::{bce_loss, sigmoid, PROB_EPS};
pub use metrics::{threshold_sweep, Metrics};
pub use siamese::{link_probability, pair_features, SiameseParams};
pub use train::{evaluate, train, TrainConfig, TrainOutcome};

/// Full architecture: message passing plus scoring head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub gnn: GnnConfig,
    /// Rectified hidden layers in the shared encoder.
    pub encoder_hidden_layers: usize,
}

impl ModelConfig {
    pub fn new(order: usize, input_dim: usize) -> Self {
        ModelConfig { gnn: GnnConfig::new(order, input_dim), encoder_hidden_layers: 1 }
    }
}

/// A directed `(source, target, label)` training or scoring example.
pub type Example = (usize, usize, bool);

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub gnn: ModelState,
    pub head: SiameseParams,
}

/// Gradients of the mean cross-entropy over a batch.
#[derive(Debug, Clone)]
pub struct PipelineGradients {
    pub model: Model,
    pub node_features: Matrix,
}

impl Model {
    /// Initializes the GNN, then the head, from one seeded stream.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.gnn.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gnn = ModelState::init_with(config.gnn, seed, &mut rng);
        let head = SiameseParams::init_with(config.gnn.output_dim, config.encoder_hidden_layers, &mut rng);
        Ok(Model { gnn, head })
    }

    pub fn from_parts(gnn: ModelState, head: SiameseParams) -> Result<Self> {
        if head.encoder.in_dim() != gnn.config.output_dim {
            return Err(Error::shape(format!(
                "encoder expects width {}, node representations have width {}",
                head.encoder.in_dim(),
                gnn.config.output_dim
            )));
        }
        Ok(Model { gnn, head })
    }

    pub fn config(&self) -> ModelConfig {
        ModelConfig { gnn: self.gnn.config, encoder_hidden_layers: self.head.encoder.layers.len() - 1 }
    }

    pub fn zeros_like(&self) -> Self {
        Model { gnn: self.gnn.zeros_like(), head: self.head.zeros_like() }
    }

    /// Every parameter tensor with a stable name, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, TensorView<'_>)> {
        let mut out = self.gnn.tensors();
        for (l, d) in self.head.encoder.layers.iter().enumerate() {
            push_dense(&mut out, &format!("head.encoder{}", l), d);
        }
        out.push((
            String::from("head.score_row"),
            TensorView { rows: 1, cols: self.head.score_row.len(), data: &self.head.score_row },
        ));
        out
    }

    /// Mutable slices in the same order as [`Model::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.gnn.tensors_mut();
        for d in self.head.encoder.layers.iter_mut() {
            push_dense_mut(&mut out, d);
        }
        out.push(&mut self.head.score_row);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.data.len()).sum()
    }

    /// Encoded node representations `ẽ`, one row per node.
    pub fn encode_nodes(&self, bundle: &GraphBundle, node_features: &Matrix) -> Result<Matrix> {
        let (reps, _) = forward_cached(bundle, node_features, &self.gnn)?;
        self.head.encoder.forward(&reps)
    }

    /// Link probabilities for `pairs`, with one full-graph pass.
    pub fn predict(&self, bundle: &GraphBundle, node_features: &Matrix, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        check_pairs(bundle, pairs.iter().copied())?;
        let enc = self.encode_nodes(bundle, node_features)?;
        Ok(pairs.iter().map(|&(p, q)| sigmoid(self.head.logit(enc.row(p), enc.row(q)))).collect())
    }

    /// Mean cross-entropy over `batch`.
    pub fn loss(&self, bundle: &GraphBundle, node_features: &Matrix, batch: &[Example]) -> Result<f64> {
        let pairs: Vec<(usize, usize)> = batch.iter().map(|&(p, q, _)| (p, q)).collect();
        let labels: Vec<bool> = batch.iter().map(|e| e.2).collect();
        bce_loss(&self.predict(bundle, node_features, &pairs)?, &labels)
    }

    /// Mean cross-entropy over `batch` and its exact gradients.
    ///
    /// The logit gradient is `p - y`, the derivative of the unclamped loss;
    /// the two agree wherever the probability clamp is inactive.
    pub fn loss_and_gradients(
        &self,
        bundle: &GraphBundle,
        node_features: &Matrix,
        batch: &[Example],
    ) -> Result<(f64, PipelineGradients)> {
        if batch.is_empty() {
            return Err(Error::config("empty batch"));
        }
        check_pairs(bundle, batch.iter().map(|&(p, q, _)| (p, q)))?;
        let (reps, gnn_cache) = forward_cached(bundle, node_features, &self.gnn)?;
        let (enc, enc_cache) = self.head.encoder.forward_cached(&reps)?;
        let m = enc.cols();
        let w = &self.head.score_row;
        let mut grad = self.zeros_like();
        let mut d_enc = Matrix::zeros(enc.rows(), m);
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for &(p, q, y) in batch {
            let (ep, eq) = (enc.row(p), enc.row(q));
            let prob = sigmoid(self.head.logit(ep, eq));
            total += loss::bce_term(prob, y);
            let dz = (prob - if y { 1.0 } else { 0.0 }) * scale;
            let gw = &mut grad.head.score_row;
            for i in 0..m {
                let (a, b) = (ep[i], eq[i]);
                gw[i] += dz * a;
                gw[m + i] += dz * b;
                gw[2 * m + i] += dz * (a - b);
                gw[3 * m + i] += dz * a * b;
            }
            gw[4 * m] += dz;
            let mut dp = Vec::with_capacity(m);
            let mut dq = Vec::with_capacity(m);
            for i in 0..m {
                dp.push(dz * (w[i] + w[2 * m + i] + w[3 * m + i] * eq[i]));
                dq.push(dz * (w[m + i] - w[2 * m + i] + w[3 * m + i] * ep[i]));
            }
            for (o, g) in d_enc.row_mut(p).iter_mut().zip(&dp) {
                *o += g;
            }
            for (o, g) in d_enc.row_mut(q).iter_mut().zip(&dq) {
                *o += g;
            }
        }
        let d_reps = self.head.encoder.backward(&enc_cache, &d_enc, &mut grad.head.encoder)?;
        let g = backward_cached(bundle, &self.gnn, &gnn_cache, &d_reps)?;
        grad.gnn = g.model;
        Ok((total * scale, PipelineGradients { model: grad, node_features: g.node_features }))
    }
}

fn check_pairs(bundle: &GraphBundle, pairs: impl Iterator<Item = (usize, usize)>) -> Result<()> {
    let n = bundle.graph().node_count();
    for (p, q) in pairs {
        if p >= n || q >= n {
            return Err(Error::validation(format!("pair ({}, {}) outside 0..{}", p, q, n)));
        }
    }
    Ok(())
}
