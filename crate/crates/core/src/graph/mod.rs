//! Directed graph model plus labeled pair splitting and negative sampling.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

mod pairs;

pub use pairs::{build_labeled_pairs, sample_negatives, split_pairs, LabeledPair, LabeledPairSet, Split};
pub(crate) use pairs::sample_negative_pairs;

/// A directed graph over nodes `0..N` with external string identifiers.
///
/// Edges are kept sorted and duplicate-free; self-loops are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    node_ids: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl DirectedGraph {
    /// Builds a graph from identifiers and index pairs. Duplicate edges collapse.
    pub fn new(node_ids: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = node_ids.len();
        let mut index = BTreeMap::new();
        for (i, id) in node_ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::validation(format!("node {} has an empty identifier", i)));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate node identifier {:?}", id)));
            }
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::validation(format!("edge ({}, {}) outside 0..{}", u, v, n)));
            }
            if u == v {
                return Err(Error::validation(format!("self-loop on node {:?}", node_ids[u])));
            }
            list.push((u, v));
        }
        list.sort_unstable();
        list.dedup();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &list {
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        for adj in in_adj.iter_mut() {
            adj.sort_unstable();
        }
        Ok(DirectedGraph { node_ids, index, edges: list, out_adj, in_adj })
    }

    /// Graph with identifiers `"0"`, `"1"`, … .
    pub fn from_edges(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new((0..node_count).map(|i| i.to_string()).collect(), edges)
    }

    /// Builds a graph from named edges; nodes are indexed in first-appearance order.
    pub fn from_named_edges<'a>(edges: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut ids: Vec<String> = Vec::new();
        let mut index: BTreeMap<&'a str, usize> = BTreeMap::new();
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::validation(format!("self-loop on node {:?}", a)));
            }
            let mut intern = |s: &'a str| {
                *index.entry(s).or_insert_with(|| {
                    ids.push(s.to_string());
                    ids.len() - 1
                })
            };
            let u = intern(a);
            let v = intern(b);
            list.push((u, v));
        }
        Self::new(ids, list)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_id(&self, v: usize) -> &str {
        &self.node_ids[v]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted out-neighbors of `v`.
    #[inline]
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    /// Sorted in-neighbors of `v`.
    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_adj[u].binary_search(&v).is_ok()
    }

    /// Relabels node `i` as `perm[i]`, carrying identifiers along.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::config("not a permutation of the node set"));
        }
        let mut ids = vec![String::new(); n];
        for (i, &p) in perm.iter().enumerate() {
            ids[p] = self.node_ids[i].clone();
        }
        Self::new(ids, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    /// Disjoint union; nodes of `other` are shifted by `self.node_count()`.
    /// Identifiers are prefixed with `a:` and `b:` to stay unique.
    pub fn disjoint_union(&self, other: &DirectedGraph) -> Self {
        let off = self.node_count();
        let ids = self
            .node_ids
            .iter()
            .map(|s| format!("a:{}", s))
            .chain(other.node_ids.iter().map(|s| format!("b:{}", s)))
            .collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + off, v + off)));
        Self::new(ids, edges).expect("union of valid graphs is valid")
    }
}
