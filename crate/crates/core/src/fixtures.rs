//! Small synthetic datasets for tests and demos.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::DirectedGraph;
use crate::matrix::Matrix;

/// A graph with node embeddings.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: DirectedGraph,
    pub features: Matrix,
}

/// Nodes in the source cluster of [`two_clusters`].
pub const SOURCE_CLUSTER: core::ops::Range<usize> = 0..2;

/// 30 nodes in two embedding clusters with 40 edges, all from the source
/// cluster (nodes 0 and 1, named `s0`, `s1`) into the target cluster (nodes
/// 2..30, named `t2`…`t29`): node 0 points at 2..22 and node 1 at 10..30.
///
/// Embeddings have width 8: the first coordinate is `+1` in the source
/// cluster and `-1` in the target cluster, the rest is seeded noise in
/// `±0.1`. Any pair set without source→target non-edges is separable by a
/// linear rule on the two endpoints' first coordinates.
pub fn two_clusters(seed: u64) -> Dataset {
    let n = 30;
    let edges = (2..22).map(|v| (0, v)).chain((10..30).map(|v| (1, v)));
    let ids: Vec<String> = (0..n)
        .map(|v| if SOURCE_CLUSTER.contains(&v) { format!("s{}", v) } else { format!("t{}", v) })
        .collect();
    let graph = DirectedGraph::new(ids, edges).expect("valid fixture");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 8;
    let mut data = Vec::with_capacity(n * d);
    for v in 0..n {
        data.push(if SOURCE_CLUSTER.contains(&v) { 1.0 } else { -1.0 });
        data.extend((1..d).map(|_| rng.gen_range(-0.1..=0.1)));
    }
    let features = Matrix::from_vec(n, d, data).expect("sized");
    Dataset { graph, features }
}

/// Seeded random digraph: each ordered non-self pair is an edge with
/// probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).expect("no self-loops")
}

/// Seeded uniform permutation of `0..n`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

/// Node features with entries uniform in `±1`.
pub fn random_features(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..=1.0)).collect()).expect("sized")
}
