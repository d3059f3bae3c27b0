//! Restricted directed k-tuples and their position graphs.
//!
//! A k-tuple `(s_1, …, s_k)` is admitted when every later element is an
//! out-neighbor of, or equal to, some earlier element. `s_1` is free, so
//! `k = 1` yields every singleton. Position graph `j` links `S` to every
//! admitted tuple obtained by replacing `S[j]` with one of its out-neighbors.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::Matrix;

pub const MAX_ORDER: usize = 3;

/// Admitted k-tuples in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    k: usize,
    node_count: usize,
    flat: Vec<usize>,
    codes: Vec<u64>,
}

impl TupleSet {
    #[inline]
    pub fn order(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn tuple(&self, idx: usize) -> &[usize] {
        &self.flat[idx * self.k..(idx + 1) * self.k]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.flat.chunks_exact(self.k)
    }

    /// Index of `tuple`, if admitted.
    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        if tuple.len() != self.k || tuple.iter().any(|&v| v >= self.node_count) {
            return None;
        }
        self.codes.binary_search(&self.code(tuple)).ok()
    }

    #[inline]
    fn code(&self, tuple: &[usize]) -> u64 {
        tuple.iter().fold(0u64, |acc, &v| acc * self.node_count as u64 + v as u64)
    }
}

fn check_order(k: usize) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::config(format!("tuple order k={} outside 1..={}", k, MAX_ORDER)));
    }
    Ok(())
}

/// Enumerates the admitted k-tuples of `graph`, lexicographically sorted.
pub fn enumerate_tuples(graph: &DirectedGraph, k: usize) -> Result<TupleSet> {
    check_order(k)?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::config("cannot enumerate tuples of an empty graph"));
    }
    let mut set = TupleSet { k, node_count: n, flat: Vec::new(), codes: Vec::new() };
    let mut prefix = Vec::with_capacity(k);
    for v in 0..n {
        prefix.push(v);
        extend(graph, k, &mut prefix, &mut set.flat);
        prefix.pop();
    }
    set.codes = set.flat.chunks_exact(k).map(|t| set.code(t)).collect();
    debug_assert!(set.codes.windows(2).all(|w| w[0] < w[1]));
    Ok(set)
}

fn extend(graph: &DirectedGraph, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<usize>) {
    if prefix.len() == k {
        out.extend_from_slice(prefix);
        return;
    }
    let mut next = BTreeSet::new();
    for &s in prefix.iter() {
        next.insert(s);
        next.extend(graph.out_neighbors(s).iter().copied());
    }
    for v in next {
        prefix.push(v);
        extend(graph, k, prefix, out);
        prefix.pop();
    }
}

/// Arcs of one position graph in compressed sparse row form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionGraph {
    position: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl PositionGraph {
    /// One-based position this graph substitutes at.
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// Targets of arcs leaving tuple `s`, ascending.
    #[inline]
    pub fn successors(&self, s: usize) -> &[usize] {
        &self.targets[self.offsets[s]..self.offsets[s + 1]]
    }

    /// All arcs, sorted by (source, target).
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |s| self.successors(s).iter().map(move |&t| (s, t)))
    }
}

/// Builds the graph over tuple indices for one-based `position`.
pub fn build_position_graph(graph: &DirectedGraph, tuples: &TupleSet, position: usize) -> Result<PositionGraph> {
    let k = tuples.order();
    if !(1..=k).contains(&position) {
        return Err(Error::config(format!("position {} outside 1..={}", position, k)));
    }
    if tuples.node_count() != graph.node_count() {
        return Err(Error::shape("tuple set was built for a different graph"));
    }
    let j = position - 1;
    let mut offsets = Vec::with_capacity(tuples.len() + 1);
    let mut targets = Vec::new();
    let mut scratch = Vec::with_capacity(k);
    offsets.push(0);
    for s in tuples.iter() {
        scratch.clear();
        scratch.extend_from_slice(s);
        for &v in graph.out_neighbors(s[j]) {
            scratch[j] = v;
            if let Some(t) = tuples.index_of(&scratch) {
                targets.push(t);
            }
        }
        offsets.push(targets.len());
    }
    Ok(PositionGraph { position, offsets, targets })
}

/// All `k` position graphs, in position order.
pub fn build_position_graphs(graph: &DirectedGraph, tuples: &TupleSet) -> Result<Vec<PositionGraph>> {
    (1..=tuples.order()).map(|j| build_position_graph(graph, tuples, j)).collect()
}

/// Row for tuple `S` is `[n_{s_1} : … : n_{s_k}]`.
pub fn initial_tuple_features(tuples: &TupleSet, node_features: &Matrix) -> Result<Matrix> {
    if node_features.rows() != tuples.node_count() {
        return Err(Error::shape(format!(
            "{} feature rows for {} nodes",
            node_features.rows(),
            tuples.node_count()
        )));
    }
    let d = node_features.cols();
    let k = tuples.order();
    let mut out = Matrix::zeros(tuples.len(), k * d);
    for (i, t) in tuples.iter().enumerate() {
        let row = out.row_mut(i);
        for (p, &v) in t.iter().enumerate() {
            row[p * d..(p + 1) * d].copy_from_slice(node_features.row(v));
        }
    }
    Ok(out)
}
