//! Higher-order message passing over position graphs.
//!
//! Tuple features start as concatenated node embeddings. Each of `T` layers
//! runs one GCN per position graph and fuses the `k` results with an MLP. The
//! final tuple features are averaged back onto nodes per position, and a
//! readout MLP maps the `k` pooled vectors of each node to its representation.
//! Gradients are derived by hand for this fixed architecture.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::Matrix;
use crate::tuples::{build_position_graphs, enumerate_tuples, PositionGraph, TupleSet, MAX_ORDER};

mod gcn;
mod mlp;
mod pool;

pub use gcn::{gcn_forward, NormalizedAdjacency};
pub use mlp::{Dense, GcnLayerParams, Mlp, MlpParams};
pub use pool::{pool_to_nodes, PoolIndex};

pub(crate) use mlp::MlpCache;

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GnnConfig {
    pub order: usize,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub output_dim: usize,
}

impl GnnConfig {
    pub fn new(order: usize, input_dim: usize) -> Self {
        GnnConfig { order, input_dim, hidden_dim: 64, layers: 2, output_dim: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(Error::config(format!("tuple order k={} outside 1..={}", self.order, MAX_ORDER)));
        }
        if self.input_dim == 0 || self.hidden_dim == 0 || self.output_dim == 0 {
            return Err(Error::config("layer widths must be positive"));
        }
        if self.layers == 0 {
            return Err(Error::config("at least one GNN layer is required"));
        }
        Ok(())
    }
}

/// Everything derived from the graph that the model consumes.
#[derive(Debug, Clone)]
pub struct GraphBundle {
    graph: DirectedGraph,
    tuples: TupleSet,
    position_graphs: Vec<PositionGraph>,
    adjacency: Vec<NormalizedAdjacency>,
    pool: PoolIndex,
}

impl GraphBundle {
    pub fn new(graph: DirectedGraph, k: usize) -> Result<Self> {
        let tuples = enumerate_tuples(&graph, k)?;
        let position_graphs = build_position_graphs(&graph, &tuples)?;
        let adjacency = position_graphs.iter().map(NormalizedAdjacency::from_position_graph).collect();
        let pool = PoolIndex::new(&tuples);
        Ok(GraphBundle { graph, tuples, position_graphs, adjacency, pool })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn tuples(&self) -> &TupleSet {
        &self.tuples
    }

    pub fn position_graphs(&self) -> &[PositionGraph] {
        &self.position_graphs
    }

    pub fn order(&self) -> usize {
        self.tuples.order()
    }
}

/// Named view of one parameter tensor.
#[derive(Debug, Clone, Copy)]
pub struct TensorView<'a> {
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

pub(crate) fn push_dense<'a>(out: &mut Vec<(String, TensorView<'a>)>, prefix: &str, d: &'a Dense) {
    out.push((
        format!("{}.weight", prefix),
        TensorView { rows: d.weight.rows(), cols: d.weight.cols(), data: d.weight.as_slice() },
    ));
    out.push((format!("{}.bias", prefix), TensorView { rows: 1, cols: d.bias.len(), data: &d.bias }));
}

pub(crate) fn push_dense_mut<'a>(out: &mut Vec<&'a mut [f64]>, d: &'a mut Dense) {
    out.push(d.weight.as_mut_slice());
    out.push(&mut d.bias);
}

/// Learnable parameters of the message-passing network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub config: GnnConfig,
    /// `gcn[t][j]`: GCN of layer `t` on position graph `j`.
    pub gcn: Vec<Vec<GcnLayerParams>>,
    /// Fusion MLP applied after each layer.
    pub fusion: Vec<Mlp>,
    pub node_mlp: Mlp,
    pub rng_seed: u64,
}

impl ModelState {
    /// Glorot-initialized parameters drawn in a fixed order from `seed`.
    pub fn init(config: GnnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::init_with(config, seed, &mut rng))
    }

    pub(crate) fn init_with(config: GnnConfig, seed: u64, rng: &mut ChaCha8Rng) -> Self {
        let GnnConfig { order: k, input_dim, hidden_dim: h, layers, output_dim } = config;
        let mut gcn = Vec::with_capacity(layers);
        let mut fusion = Vec::with_capacity(layers);
        for t in 0..layers {
            let in_dim = if t == 0 { k * input_dim } else { h };
            gcn.push((0..k).map(|_| Dense::glorot(in_dim, h, rng)).collect());
            fusion.push(Mlp::glorot(&[k * h, h, h], rng));
        }
        let node_mlp = Mlp::glorot(&[k * h, h, output_dim], rng);
        ModelState { config, gcn, fusion, node_mlp, rng_seed: seed }
    }

    /// Assembles a state from explicit parameters, checking the dimension chain.
    pub fn from_parts(
        config: GnnConfig,
        gcn: Vec<Vec<GcnLayerParams>>,
        fusion: Vec<Mlp>,
        node_mlp: Mlp,
        rng_seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let state = ModelState { config, gcn, fusion, node_mlp, rng_seed };
        state.check_dims()?;
        Ok(state)
    }

    fn check_dims(&self) -> Result<()> {
        let GnnConfig { order: k, input_dim, hidden_dim: h, layers, output_dim } = self.config;
        let bad = |what: String| Err(Error::shape(what));
        if self.gcn.len() != layers || self.fusion.len() != layers {
            return bad(format!("expected {} layers", layers));
        }
        let mut width = k * input_dim;
        for (t, (convs, fuse)) in self.gcn.iter().zip(&self.fusion).enumerate() {
            if convs.len() != k {
                return bad(format!("layer {} has {} position GCNs, expected {}", t, convs.len(), k));
            }
            for (j, c) in convs.iter().enumerate() {
                if c.in_dim() != width || c.out_dim() != h {
                    return bad(format!(
                        "layer {} position {} GCN is {}x{}, expected {}x{}",
                        t,
                        j + 1,
                        c.in_dim(),
                        c.out_dim(),
                        width,
                        h
                    ));
                }
            }
            if fuse.in_dim() != k * h || fuse.out_dim() != h {
                return bad(format!("layer {} fusion MLP maps {} -> {}", t, fuse.in_dim(), fuse.out_dim()));
            }
            width = h;
        }
        if self.node_mlp.in_dim() != k * h || self.node_mlp.out_dim() != output_dim {
            return bad(format!(
                "node MLP maps {} -> {}, expected {} -> {}",
                self.node_mlp.in_dim(),
                self.node_mlp.out_dim(),
                k * h,
                output_dim
            ));
        }
        Ok(())
    }

    pub fn zeros_like(&self) -> Self {
        ModelState {
            config: self.config,
            gcn: self.gcn.iter().map(|l| l.iter().map(Dense::zeros_like).collect()).collect(),
            fusion: self.fusion.iter().map(Mlp::zeros_like).collect(),
            node_mlp: self.node_mlp.zeros_like(),
            rng_seed: self.rng_seed,
        }
    }

    /// Every parameter tensor with a stable name, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, TensorView<'_>)> {
        let mut out = Vec::new();
        for (t, (convs, fuse)) in self.gcn.iter().zip(&self.fusion).enumerate() {
            for (j, c) in convs.iter().enumerate() {
                push_dense(&mut out, &format!("gnn.layer{}.pos{}", t, j + 1), c);
            }
            for (l, d) in fuse.layers.iter().enumerate() {
                push_dense(&mut out, &format!("gnn.layer{}.fusion{}", t, l), d);
            }
        }
        for (l, d) in self.node_mlp.layers.iter().enumerate() {
            push_dense(&mut out, &format!("gnn.readout{}", l), d);
        }
        out
    }

    /// Mutable slices in the same order as [`ModelState::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for (convs, fuse) in self.gcn.iter_mut().zip(self.fusion.iter_mut()) {
            for c in convs.iter_mut() {
                push_dense_mut(&mut out, c);
            }
            for d in fuse.layers.iter_mut() {
                push_dense_mut(&mut out, d);
            }
        }
        for d in self.node_mlp.layers.iter_mut() {
            push_dense_mut(&mut out, d);
        }
        out
    }

    fn check_bundle(&self, bundle: &GraphBundle, node_features: &Matrix) -> Result<()> {
        if bundle.order() != self.config.order {
            return Err(Error::shape(format!(
                "model expects k={}, tuple set has k={}",
                self.config.order,
                bundle.order()
            )));
        }
        if node_features.rows() != bundle.graph.node_count() {
            return Err(Error::shape(format!(
                "{} feature rows for {} nodes",
                node_features.rows(),
                bundle.graph.node_count()
            )));
        }
        if node_features.cols() != self.config.input_dim {
            return Err(Error::shape(format!(
                "embedding width {} but the model expects {}",
                node_features.cols(),
                self.config.input_dim
            )));
        }
        Ok(())
    }
}

/// Concatenates the per-position features of each tuple and applies the fusion MLP.
pub fn fuse(per_position: &[Matrix], fusion: &Mlp) -> Result<Matrix> {
    check_blocks(per_position)?;
    let refs: Vec<&Matrix> = per_position.iter().collect();
    fusion.forward(&Matrix::hconcat(&refs)?)
}

/// Concatenates the pooled vectors of each node and applies the node MLP.
pub fn node_readout(pooled: &[Matrix], node_mlp: &Mlp) -> Result<Matrix> {
    check_blocks(pooled)?;
    let refs: Vec<&Matrix> = pooled.iter().collect();
    node_mlp.forward(&Matrix::hconcat(&refs)?)
}

fn check_blocks(blocks: &[Matrix]) -> Result<()> {
    let first = blocks.first().ok_or_else(|| Error::shape("no blocks to combine"))?;
    if blocks.iter().any(|b| b.rows() != first.rows() || b.cols() != first.cols()) {
        return Err(Error::shape("blocks disagree on shape"));
    }
    Ok(())
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    node_features: Matrix,
    /// Inputs of layers after the first.
    layer_inputs: Vec<Matrix>,
    gcn_pres: Vec<Vec<Matrix>>,
    fusion: Vec<MlpCache>,
    readout: MlpCache,
}

/// Gradients of a scalar objective.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub model: ModelState,
    pub node_features: Matrix,
}

#[cfg(feature = "parallel")]
fn per_position<T: Send>(k: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..k).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn per_position<T>(k: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..k).map(f).collect()
}

/// Node representations, `N × output_dim`.
pub fn forward(bundle: &GraphBundle, node_features: &Matrix, model: &ModelState) -> Result<Matrix> {
    Ok(forward_cached(bundle, node_features, model)?.0)
}

pub fn forward_cached(
    bundle: &GraphBundle,
    node_features: &Matrix,
    model: &ModelState,
) -> Result<(Matrix, ForwardCache)> {
    model.check_bundle(bundle, node_features)?;
    let k = bundle.order();
    let mut x: Option<Matrix> = None;
    let mut layer_inputs = Vec::with_capacity(model.config.layers.saturating_sub(1));
    let mut gcn_pres = Vec::with_capacity(model.config.layers);
    let mut fusion = Vec::with_capacity(model.config.layers);
    for (convs, fuse) in model.gcn.iter().zip(&model.fusion) {
        let outs = per_position(k, |j| {
            // The first layer projects node features directly.
            let z = match &x {
                None => gcn::project_nodes(&bundle.tuples, node_features, &convs[j])?,
                Some(x) => gcn::project(x, &convs[j])?,
            };
            gcn::propagate(&bundle.adjacency[j], &z, &convs[j].bias)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let (outs, pres): (Vec<Matrix>, Vec<Matrix>) = outs.into_iter().unzip();
        let refs: Vec<&Matrix> = outs.iter().collect();
        let (next, cache) = fuse.forward_cached(&Matrix::hconcat(&refs)?)?;
        if let Some(prev) = x.replace(next) {
            layer_inputs.push(prev);
        }
        gcn_pres.push(pres);
        fusion.push(cache);
    }
    let x = x.ok_or_else(|| Error::config("the GNN needs at least one layer"))?;
    let pooled = bundle.pool.pool(&x);
    let refs: Vec<&Matrix> = pooled.iter().collect();
    let (out, readout) = model.node_mlp.forward_cached(&Matrix::hconcat(&refs)?)?;
    Ok((out, ForwardCache { node_features: node_features.clone(), layer_inputs, gcn_pres, fusion, readout }))
}

/// Gradients of `⟨upstream, forward(…)⟩` using a cache from [`forward_cached`].
pub fn backward_cached(
    bundle: &GraphBundle,
    model: &ModelState,
    cache: &ForwardCache,
    upstream: &Matrix,
) -> Result<Gradients> {
    let n = bundle.graph.node_count();
    if upstream.rows() != n || upstream.cols() != model.config.output_dim {
        return Err(Error::shape(format!(
            "upstream gradient is {}x{}, output is {}x{}",
            upstream.rows(),
            upstream.cols(),
            n,
            model.config.output_dim
        )));
    }
    let k = bundle.order();
    let h = model.config.hidden_dim;
    let mut grads = model.zeros_like();

    let d_concat = model.node_mlp.backward(&cache.readout, upstream, &mut grads.node_mlp)?;
    let d_pooled = d_concat.hsplit(h);
    let mut d_x = bundle.pool.backward(&d_pooled, bundle.tuples.len());
    let mut d_nodes = Matrix::zeros(n, model.config.input_dim);

    for t in (0..model.config.layers).rev() {
        let d_cat = model.fusion[t].backward(&cache.fusion[t], &d_x, &mut grads.fusion[t])?;
        let d_outs = d_cat.hsplit(h);
        let convs = &model.gcn[t];
        let pres = &cache.gcn_pres[t];
        let parts = per_position(k, |j| {
            let mut g = convs[j].zeros_like();
            let d_z = gcn::propagate_backward(&bundle.adjacency[j], &pres[j], &d_outs[j], &mut g.bias)?;
            Ok((g, d_z))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        if t == 0 {
            for (j, (mut g, d_z)) in parts.into_iter().enumerate() {
                gcn::project_nodes_backward(
                    &bundle.tuples,
                    &cache.node_features,
                    &convs[j],
                    &d_z,
                    &mut g.weight,
                    &mut d_nodes,
                )?;
                grads.gcn[t][j] = g;
            }
            break;
        }
        let x_in = &cache.layer_inputs[t - 1];
        let mut acc = Matrix::zeros(x_in.rows(), x_in.cols());
        for (j, (mut g, d_z)) in parts.into_iter().enumerate() {
            acc.add_assign(&gcn::project_backward(x_in, &convs[j], &d_z, &mut g.weight)?)?;
            grads.gcn[t][j] = g;
        }
        d_x = acc;
    }

    Ok(Gradients { model: grads, node_features: d_nodes })
}

/// Runs the forward pass and returns gradients of `⟨upstream, output⟩`.
pub fn backward(
    bundle: &GraphBundle,
    node_features: &Matrix,
    model: &ModelState,
    upstream: &Matrix,
) -> Result<Gradients> {
    let (_, cache) = forward_cached(bundle, node_features, model)?;
    backward_cached(bundle, model, &cache, upstream)
}
