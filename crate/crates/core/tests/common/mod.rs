//! Brute-force reference implementations shared by the integration tests.
//!
//! Everything here is written for clarity over speed and deliberately avoids
//! the library's own tuple tables, sparse operators and color interning.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use wlprereq_core::gnn::{GraphBundle, Mlp, ModelState};
use wlprereq_core::predictor::{Example, Model};
use wlprereq_core::{DirectedGraph, Matrix};

pub type Dense = Vec<Vec<f64>>;

/// Every `k`-tuple of `0..n` in lexicographic order.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..n).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Each entry after the first equals, or is an out-neighbor of, an earlier entry.
pub fn admitted(g: &DirectedGraph, t: &[usize]) -> bool {
    (1..t.len()).all(|i| (0..i).any(|j| t[i] == t[j] || g.has_edge(t[j], t[i])))
}

pub fn brute_tuples(g: &DirectedGraph, k: usize) -> Vec<Vec<usize>> {
    all_tuples(g.node_count(), k).into_iter().filter(|t| admitted(g, t)).collect()
}

/// Arcs of position graph `j` (0-based) as index pairs into `tuples`, found
/// by trying every vertex at position `j`.
pub fn brute_arcs(g: &DirectedGraph, tuples: &[Vec<usize>], j: usize) -> BTreeSet<(usize, usize)> {
    let index: BTreeMap<&[usize], usize> = tuples.iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
    let mut arcs = BTreeSet::new();
    for (s, t) in tuples.iter().enumerate() {
        for v in 0..g.node_count() {
            if !g.has_edge(t[j], v) {
                continue;
            }
            let mut u = t.clone();
            u[j] = v;
            if let Some(&dst) = index.get(u.as_slice()) {
                arcs.insert((s, dst));
            }
        }
    }
    arcs
}

fn atomic_label(g: &DirectedGraph, t: &[usize]) -> String {
    let mut s = String::new();
    for a in 0..t.len() {
        for b in 0..t.len() {
            let rel = if t[a] == t[b] { 'e' } else if g.has_edge(t[a], t[b]) { 'a' } else { '.' };
            s.push(rel);
        }
    }
    s
}

/// Histogram-based verdict of directed k-WL on restricted tuples of the
/// disjoint union. Every out-neighbor substitution contributes a label: the
/// current color when the result is an admitted tuple, its fixed atomic label
/// otherwise.
pub fn brute_distinguish(g1: &DirectedGraph, g2: &DirectedGraph, k: usize) -> bool {
    let n1 = g1.node_count();
    let n = n1 + g2.node_count();
    let mut edges: Vec<(usize, usize)> = g1.edges().to_vec();
    edges.extend(g2.edges().iter().map(|&(u, v)| (u + n1, v + n1)));
    let g = DirectedGraph::from_edges(n, edges).unwrap();
    let tuples = brute_tuples(&g, k);
    let index: BTreeMap<Vec<usize>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let side: Vec<bool> = tuples.iter().map(|t| t[0] < n1).collect();

    let mut colors: Vec<String> = tuples.iter().map(|t| atomic_label(&g, t)).collect();
    let histograms_differ = |colors: &[String]| {
        let mut h: [BTreeMap<&str, usize>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (c, &left) in colors.iter().zip(&side) {
            *h[left as usize].entry(c.as_str()).or_default() += 1;
        }
        h[0] != h[1]
    };
    let classes = |colors: &[String]| colors.iter().collect::<BTreeSet<_>>().len();

    loop {
        if histograms_differ(&colors) {
            return true;
        }
        let next: Vec<String> = tuples
            .iter()
            .enumerate()
            .map(|(s, t)| {
                let mut sig = format!("[{}]", colors[s]);
                for j in 0..k {
                    let mut labels: Vec<String> = Vec::new();
                    for v in g.out_neighbors(t[j]) {
                        let mut u = t.clone();
                        u[j] = *v;
                        labels.push(match index.get(&u) {
                            Some(&i) => format!("c{}", colors[i]),
                            None => format!("x{}", atomic_label(&g, &u)),
                        });
                    }
                    labels.sort();
                    sig.push_str(&format!("|{}:{}", j, labels.join(",")));
                }
                sig
            })
            .collect();
        // Compress to short canonical names so strings stay small.
        let names: BTreeMap<&String, usize> =
            next.iter().collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        let next: Vec<String> = next.iter().map(|s| names[s].to_string()).collect();
        let stable = classes(&next) == classes(&colors);
        colors = next;
        if stable {
            return histograms_differ(&colors);
        }
    }
}

fn to_dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn affine(x: &Dense, w: &Matrix, b: &[f64]) -> Dense {
    x.iter()
        .map(|row| {
            (0..w.cols())
                .map(|o| b[o] + row.iter().enumerate().map(|(i, v)| v * w.get(i, o)).sum::<f64>())
                .collect()
        })
        .collect()
}

fn relu(x: Dense) -> Dense {
    x.into_iter().map(|r| r.into_iter().map(|v| v.max(0.0)).collect()).collect()
}

pub fn dense_mlp(x: &Dense, mlp: &Mlp) -> Dense {
    let mut h = x.clone();
    for (l, layer) in mlp.layers.iter().enumerate() {
        h = affine(&h, &layer.weight, &layer.bias);
        if l + 1 < mlp.layers.len() {
            h = relu(h);
        }
    }
    h
}

fn hconcat(blocks: &[Dense]) -> Dense {
    (0..blocks[0].len()).map(|i| blocks.iter().flat_map(|b| b[i].iter().copied()).collect()).collect()
}

/// `D^{-1/2} (A ∨ Aᵀ + I) D^{-1/2}` as a dense matrix.
pub fn dense_normalized(size: usize, arcs: &BTreeSet<(usize, usize)>) -> Dense {
    let mut a = vec![vec![0.0; size]; size];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for &(s, t) in arcs {
        a[s][t] = 1.0;
        a[t][s] = 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    for (row, di) in a.iter_mut().zip(&deg) {
        for (v, dj) in row.iter_mut().zip(&deg) {
            *v /= (di * dj).sqrt();
        }
    }
    a
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

/// Per-tuple features after every layer, then node outputs, all dense.
pub fn dense_forward(g: &DirectedGraph, feats: &Matrix, model: &ModelState) -> Dense {
    let k = model.config.order;
    let tuples = brute_tuples(g, k);
    let x = to_dense(feats);
    let mut h: Dense = tuples.iter().map(|t| t.iter().flat_map(|&v| x[v].iter().copied()).collect()).collect();
    let adj: Vec<Dense> = (0..k).map(|j| dense_normalized(tuples.len(), &brute_arcs(g, &tuples, j))).collect();
    for t in 0..model.config.layers {
        let blocks: Vec<Dense> = (0..k)
            .map(|j| {
                let conv = &model.gcn[t][j];
                relu(affine(&matmul(&adj[j], &h), &conv.weight, &conv.bias))
            })
            .collect();
        h = dense_mlp(&hconcat(&blocks), &model.fusion[t]);
    }
    let width = h[0].len();
    let pooled: Vec<Dense> = (0..k)
        .map(|j| {
            (0..g.node_count())
                .map(|v| {
                    let members: Vec<&Vec<f64>> = tuples.iter().zip(&h).filter(|(t, _)| t[j] == v).map(|(_, r)| r).collect();
                    if members.is_empty() {
                        return vec![0.0; width];
                    }
                    (0..width).map(|c| members.iter().map(|r| r[c]).sum::<f64>() / members.len() as f64).collect()
                })
                .collect()
        })
        .collect();
    dense_mlp(&hconcat(&pooled), &model.node_mlp)
}

pub fn max_abs_diff(a: &Dense, b: &Matrix) -> f64 {
    assert_eq!(a.len(), b.rows());
    a.iter()
        .enumerate()
        .flat_map(|(i, r)| {
            assert_eq!(r.len(), b.cols());
            r.iter().enumerate().map(move |(j, v)| (v - b.get(i, j)).abs())
        })
        .fold(0.0, f64::max)
}

/// Worst relative error between analytic and central-difference gradients
/// over `per_tensor` seeded coordinates of every parameter tensor, plus
/// every node-feature coordinate. Returns `(tensor name, error)` pairs.
#[allow(clippy::too_many_arguments)]
pub fn gradient_check(
    model: &Model,
    bundle: &GraphBundle,
    feats: &Matrix,
    batch: &[Example],
    eps: f64,
    per_tensor: usize,
    floor: f64,
    seed: u64,
) -> Vec<(String, f64)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (_, grads) = model.loss_and_gradients(bundle, feats, batch).unwrap();
    let analytic: Vec<(String, Vec<f64>)> =
        grads.model.tensors().into_iter().map(|(name, t)| (name, t.data.to_vec())).collect();
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(floor);
    let mut report = Vec::new();
    for (ti, (name, g)) in analytic.iter().enumerate() {
        let mut picks: Vec<usize> = (0..g.len()).collect();
        picks.shuffle(&mut rng);
        picks.truncate(per_tensor);
        let mut worst = 0.0f64;
        for c in picks {
            let mut probe = model.clone();
            let base = probe.tensors_mut()[ti][c];
            probe.tensors_mut()[ti][c] = base + eps;
            let up = probe.loss(bundle, feats, batch).unwrap();
            probe.tensors_mut()[ti][c] = base - eps;
            let down = probe.loss(bundle, feats, batch).unwrap();
            worst = worst.max(rel(g[c], (up - down) / (2.0 * eps)));
        }
        report.push((name.clone(), worst));
    }
    let mut worst = 0.0f64;
    for c in 0..feats.as_slice().len() {
        let mut f = feats.clone();
        let base = f.as_slice()[c];
        f.as_mut_slice()[c] = base + eps;
        let up = model.loss(bundle, &f, batch).unwrap();
        f.as_mut_slice()[c] = base - eps;
        let down = model.loss(bundle, &f, batch).unwrap();
        worst = worst.max(rel(grads.node_features.as_slice()[c], (up - down) / (2.0 * eps)));
    }
    report.push(("node_features".to_string(), worst));
    report
}

pub fn cycle(n: usize) -> DirectedGraph {
    DirectedGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

pub fn two_triangles() -> DirectedGraph {
    DirectedGraph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap()
}
