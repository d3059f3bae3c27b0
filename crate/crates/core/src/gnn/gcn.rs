use alloc::format;
use alloc::vec::Vec;

use super::mlp::GcnLayerParams;
use crate::error::{Error, Result};
use crate::matrix::{relu_backward_in_place, relu_in_place, Matrix};
use crate::tuples::{PositionGraph, TupleSet};

/// `D̃^{-1/2} (A_sym + I) D̃^{-1/2}` for a position graph, where `A_sym`
/// joins two tuples if an arc runs either way. Rows are sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn from_position_graph(pg: &PositionGraph) -> Self {
        let n = pg.node_count();
        let mut nbrs: Vec<Vec<usize>> = (0..n).map(|i| alloc::vec![i]).collect();
        for (s, t) in pg.arcs() {
            nbrs[s].push(t);
            nbrs[t].push(s);
        }
        for list in nbrs.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let inv_sqrt: Vec<f64> = nbrs.iter().map(|l| 1.0 / libm::sqrt(l.len() as f64)).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (i, list) in nbrs.iter().enumerate() {
            for &j in list {
                cols.push(j);
                weights.push(inv_sqrt[i] * inv_sqrt[j]);
            }
            offsets.push(cols.len());
        }
        NormalizedAdjacency { offsets, cols, weights }
    }

    pub fn size(&self) -> usize {
        self.offsets.len() - 1
    }

    /// `(column, weight)` entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// `Â · x`. The operator is symmetric, so this also serves as `Âᵀ · x`.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.size() {
            return Err(Error::shape(format!("{} rows for a {}-node adjacency", x.rows(), self.size())));
        }
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..self.size() {
            for (j, w) in self.row(i) {
                let src = x.row(j);
                for (o, v) in out.row_mut(i).iter_mut().zip(src) {
                    *o += w * v;
                }
            }
        }
        Ok(out)
    }
}

/// Returns `(relu(pre), pre)` with `pre = Â · z + b`.
pub(crate) fn propagate(adj: &NormalizedAdjacency, z: &Matrix, bias: &[f64]) -> Result<(Matrix, Matrix)> {
    let mut pre = adj.apply(z)?;
    pre.add_row_vector(bias)?;
    let mut out = pre.clone();
    relu_in_place(&mut out);
    Ok((out, pre))
}

/// Accumulates the bias gradient and returns `∂/∂z`.
pub(crate) fn propagate_backward(
    adj: &NormalizedAdjacency,
    pre: &Matrix,
    d_out: &Matrix,
    grad_bias: &mut [f64],
) -> Result<Matrix> {
    let mut d_pre = d_out.clone();
    relu_backward_in_place(&mut d_pre, pre);
    for (g, d) in grad_bias.iter_mut().zip(d_pre.col_sums()) {
        *g += d;
    }
    adj.apply(&d_pre)
}

fn check_width(x: &Matrix, params: &GcnLayerParams) -> Result<()> {
    if x.cols() != params.in_dim() {
        return Err(Error::shape(format!("GCN expects width {}, got {}", params.in_dim(), x.cols())));
    }
    Ok(())
}

/// Rows `p·d .. (p+1)·d` of `w`.
fn row_block(w: &Matrix, p: usize, d: usize) -> Matrix {
    let data = w.as_slice()[p * d * w.cols()..(p + 1) * d * w.cols()].to_vec();
    Matrix::from_vec(d, w.cols(), data).expect("block of a valid matrix")
}

/// `[x_{s_1} : … : x_{s_k}] · W` for every tuple `s`, computed per position
/// as `x · W_p` gathered by tuple entry, without forming the concatenation.
pub(crate) fn project_nodes(tuples: &TupleSet, nodes: &Matrix, params: &GcnLayerParams) -> Result<Matrix> {
    let d = nodes.cols();
    if d * tuples.order() != params.in_dim() {
        return Err(Error::shape(format!("GCN expects width {}, got {}", params.in_dim(), d * tuples.order())));
    }
    let mut z = Matrix::zeros(tuples.len(), params.out_dim());
    for p in 0..tuples.order() {
        let y = nodes.matmul(&row_block(&params.weight, p, d))?;
        for (s, t) in tuples.iter().enumerate() {
            for (o, v) in z.row_mut(s).iter_mut().zip(y.row(t[p])) {
                *o += v;
            }
        }
    }
    Ok(z)
}

/// Backward of [`project_nodes`]: accumulates the weight gradient and adds
/// `∂/∂nodes` into `d_nodes`.
pub(crate) fn project_nodes_backward(
    tuples: &TupleSet,
    nodes: &Matrix,
    params: &GcnLayerParams,
    d_z: &Matrix,
    grad_weight: &mut Matrix,
    d_nodes: &mut Matrix,
) -> Result<()> {
    let d = nodes.cols();
    let out = params.out_dim();
    for p in 0..tuples.order() {
        let mut scattered = Matrix::zeros(nodes.rows(), out);
        for (s, t) in tuples.iter().enumerate() {
            for (o, v) in scattered.row_mut(t[p]).iter_mut().zip(d_z.row(s)) {
                *o += v;
            }
        }
        let gw = nodes.t_matmul(&scattered)?;
        for (g, v) in grad_weight.as_mut_slice()[p * d * out..(p + 1) * d * out].iter_mut().zip(gw.as_slice()) {
            *g += v;
        }
        d_nodes.add_assign(&scattered.matmul_t(&row_block(&params.weight, p, d))?)?;
    }
    Ok(())
}

/// `x · W`, after checking the width.
pub(crate) fn project(x: &Matrix, params: &GcnLayerParams) -> Result<Matrix> {
    check_width(x, params)?;
    x.matmul(&params.weight)
}

/// Accumulates the weight gradient of [`project`] and returns `∂/∂x`.
pub(crate) fn project_backward(
    x: &Matrix,
    params: &GcnLayerParams,
    d_z: &Matrix,
    grad_weight: &mut Matrix,
) -> Result<Matrix> {
    grad_weight.add_assign(&x.t_matmul(d_z)?)?;
    d_z.matmul_t(&params.weight)
}

/// One GCN layer on a position graph: `relu(Â · feats · W + b)`.
pub fn gcn_forward(pg: &PositionGraph, feats: &Matrix, params: &GcnLayerParams) -> Result<Matrix> {
    if feats.rows() != pg.node_count() {
        return Err(Error::shape(format!("{} feature rows for {} tuples", feats.rows(), pg.node_count())));
    }
    let adj = NormalizedAdjacency::from_position_graph(pg);
    Ok(propagate(&adj, &project(feats, params)?, &params.bias)?.0)
}
