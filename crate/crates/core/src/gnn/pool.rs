use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tuples::TupleSet;

/// For each position and node, the ascending tuple indices holding that node
/// at that position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolIndex {
    members: Vec<Vec<Vec<usize>>>,
}

impl PoolIndex {
    pub fn new(tuples: &TupleSet) -> Self {
        let mut members = vec![vec![Vec::new(); tuples.node_count()]; tuples.order()];
        for (s, t) in tuples.iter().enumerate() {
            for (p, &v) in t.iter().enumerate() {
                members[p][v].push(s);
            }
        }
        PoolIndex { members }
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn node_count(&self) -> usize {
        self.members.first().map_or(0, Vec::len)
    }

    pub fn members(&self, position: usize, node: usize) -> &[usize] {
        &self.members[position][node]
    }

    /// Mean of tuple rows per node, one matrix per position. Nodes that never
    /// occupy a position get a zero row.
    pub fn pool(&self, tuple_feats: &Matrix) -> Vec<Matrix> {
        self.members
            .iter()
            .map(|by_node| {
                let mut out = Matrix::zeros(by_node.len(), tuple_feats.cols());
                for (v, list) in by_node.iter().enumerate() {
                    if list.is_empty() {
                        continue;
                    }
                    let row = out.row_mut(v);
                    for &s in list {
                        for (o, x) in row.iter_mut().zip(tuple_feats.row(s)) {
                            *o += x;
                        }
                    }
                    let inv = 1.0 / list.len() as f64;
                    row.iter_mut().for_each(|o| *o *= inv);
                }
                out
            })
            .collect()
    }

    /// Gradient with respect to the tuple rows given per-position node gradients.
    pub(crate) fn backward(&self, d_pooled: &[Matrix], tuple_count: usize) -> Matrix {
        let width = d_pooled[0].cols();
        let mut d = Matrix::zeros(tuple_count, width);
        for (by_node, dp) in self.members.iter().zip(d_pooled) {
            for (v, list) in by_node.iter().enumerate() {
                if list.is_empty() {
                    continue;
                }
                let inv = 1.0 / list.len() as f64;
                for &s in list {
                    for (o, g) in d.row_mut(s).iter_mut().zip(dp.row(v)) {
                        *o += g * inv;
                    }
                }
            }
        }
        d
    }
}

/// Average allocation of tuple features back to nodes, per position.
pub fn pool_to_nodes(tuple_feats: &Matrix, tuples: &TupleSet) -> Result<Vec<Matrix>> {
    if tuple_feats.rows() != tuples.len() {
        return Err(Error::shape(format!(
            "{} feature rows for {} tuples",
            tuple_feats.rows(),
            tuples.len()
        )));
    }
    Ok(PoolIndex::new(tuples).pool(tuple_feats))
}
