use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DirectedGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Test,
}

/// A directed `(source, target)` example with its label and split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledPair {
    pub source: usize,
    pub target: usize,
    pub label: bool,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledPairSet {
    pub pairs: Vec<LabeledPair>,
}

impl LabeledPairSet {
    /// Tags `floor(ratio * len)` of `pairs` as train (chosen by a seeded
    /// shuffle) and the rest as test, appending them in input order.
    pub fn add_split(&mut self, pairs: &[(usize, usize)], label: bool, ratio: f64, seed: u64) -> Result<()> {
        check_ratio(ratio)?;
        let n_train = libm::floor(ratio * pairs.len() as f64) as usize;
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut is_train = alloc::vec![false; pairs.len()];
        for &i in &order[..n_train] {
            is_train[i] = true;
        }
        for (&(source, target), train) in pairs.iter().zip(is_train) {
            let split = if train { Split::Train } else { Split::Test };
            self.pairs.push(LabeledPair { source, target, label, split });
        }
        Ok(())
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &LabeledPair> + '_ {
        self.pairs.iter().filter(move |p| p.split == split)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks that labels are consistent with `graph`: positives are edges,
    /// negatives are not, and no pair carries two labels.
    pub fn validate(&self, graph: &DirectedGraph) -> Result<()> {
        let mut seen = alloc::collections::BTreeMap::new();
        for p in &self.pairs {
            let n = graph.node_count();
            if p.source >= n || p.target >= n {
                return Err(Error::validation(format!("pair ({}, {}) outside the graph", p.source, p.target)));
            }
            if p.label != graph.has_edge(p.source, p.target) {
                return Err(Error::validation(format!(
                    "pair ({}, {}) labeled {} disagrees with the graph",
                    p.source, p.target, p.label as u8
                )));
            }
            if let Some(prev) = seen.insert((p.source, p.target), p.label) {
                if prev != p.label {
                    return Err(Error::validation(format!(
                        "pair ({}, {}) carries conflicting labels",
                        p.source, p.target
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::config(format!("split ratio {} outside (0, 1)", ratio)));
    }
    Ok(())
}

/// Splits positive pairs into train and test: `floor(ratio * len)` train.
pub fn split_pairs(positives: &[(usize, usize)], ratio: f64, seed: u64) -> Result<LabeledPairSet> {
    check_ratio(ratio)?;
    if positives.is_empty() {
        return Err(Error::config("no positive pairs to split"));
    }
    let mut set = LabeledPairSet::default();
    set.add_split(positives, true, ratio, seed)?;
    Ok(set)
}

/// Draws `ceil(ratio * |positives|)` negative pairs.
///
/// Half come from reversed positives that are not positives themselves, half
/// uniformly from ordered non-self pairs that are neither positive, graph
/// edges, nor already drawn. An odd count is settled by a coin flip; a
/// shortfall in the reverse bucket is made up from the uniform bucket.
pub fn sample_negatives(
    graph: &DirectedGraph,
    positives: &[(usize, usize)],
    seed: u64,
    ratio: f64,
) -> Result<Vec<(usize, usize)>> {
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(Error::config(format!("negative ratio {} must be finite and >= 0", ratio)));
    }
    let count = libm::ceil(ratio * positives.len() as f64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_negative_pairs(graph, positives, positives, count, &mut rng)
}

/// Core sampler: reversed candidates come from `reverse_source`, exclusions
/// from `positives` and the graph's edges.
pub(crate) fn sample_negative_pairs(
    graph: &DirectedGraph,
    positives: &[(usize, usize)],
    reverse_source: &[(usize, usize)],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = graph.node_count();
    for &(u, v) in positives.iter().chain(reverse_source) {
        if u >= n || v >= n {
            return Err(Error::validation(format!("pair ({}, {}) outside 0..{}", u, v, n)));
        }
    }
    let mut excluded: BTreeSet<(usize, usize)> = positives.iter().copied().filter(|(u, v)| u != v).collect();
    excluded.extend(graph.edges().iter().copied());

    let mut n_rev = count / 2;
    if count % 2 == 1 && rng.gen::<bool>() {
        n_rev += 1;
    }

    let mut reversed: Vec<(usize, usize)> = Vec::new();
    let mut seen = BTreeSet::new();
    for &(p, q) in reverse_source {
        if p != q && !excluded.contains(&(q, p)) && seen.insert((q, p)) {
            reversed.push((q, p));
        }
    }
    reversed.shuffle(rng);
    reversed.truncate(n_rev);

    let mut out = reversed;
    excluded.extend(out.iter().copied());
    let n_rand = count - out.len();

    let total = n * n.saturating_sub(1);
    let available = total - excluded.len();
    if n_rand > available {
        return Err(Error::SamplingExhausted { requested: count, available: available + out.len() });
    }
    if n_rand == 0 {
        return Ok(out);
    }

    if available <= 4 * n_rand {
        // Dense request: enumerate the complement and take a shuffled prefix.
        let mut pool: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && !excluded.contains(&(u, v)))
            .collect();
        let (chosen, _) = pool.partial_shuffle(rng, n_rand);
        out.extend_from_slice(chosen);
    } else {
        while out.len() < count {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && excluded.insert((u, v)) {
                out.push((u, v));
            }
        }
    }
    Ok(out)
}

/// Positives are every edge of `graph`. Negatives are drawn once with
/// [`sample_negatives`]; both classes are then split with the same ratio.
pub fn build_labeled_pairs(
    graph: &DirectedGraph,
    split_ratio: f64,
    negative_ratio: f64,
    seed: u64,
) -> Result<LabeledPairSet> {
    let positives = graph.edges().to_vec();
    let mut set = split_pairs(&positives, split_ratio, seed)?;
    let negatives = sample_negatives(graph, &positives, seed.wrapping_add(1), negative_ratio)?;
    set.add_split(&negatives, false, split_ratio, seed.wrapping_add(2))?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_twenty_split() {
        let pos: Vec<_> = (0..10).map(|i| (i, i + 1)).collect();
        let set = split_pairs(&pos, 0.8, 7).unwrap();
        assert_eq!(set.split(Split::Train).count(), 8);
        assert_eq!(set.split(Split::Test).count(), 2);
        assert_eq!(set, split_pairs(&pos, 0.8, 7).unwrap());
    }

    #[test]
    fn single_positive_goes_to_test() {
        let set = split_pairs(&[(0, 1)], 0.8, 1).unwrap();
        assert_eq!(set.split(Split::Train).count(), 0);
        assert_eq!(set.split(Split::Test).count(), 1);
    }

    #[test]
    fn bad_ratio_is_config_error() {
        for r in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(split_pairs(&[(0, 1)], r, 0), Err(Error::Config(_))));
        }
        assert!(matches!(split_pairs(&[], 0.8, 0), Err(Error::Config(_))));
    }

    #[test]
    fn single_negative_on_three_nodes() {
        let g = DirectedGraph::from_edges(3, [(0, 1)]).unwrap();
        // every ordered non-self pair other than the positive
        let oracle: Vec<(usize, usize)> = (0..3)
            .flat_map(|u| (0..3).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && (u, v) != (0, 1))
            .collect();
        let mut saw_reverse = false;
        for seed in 0..32 {
            let neg = sample_negatives(&g, &[(0, 1)], seed, 1.0).unwrap();
            assert_eq!(neg.len(), 1);
            assert!(oracle.contains(&neg[0]));
            saw_reverse |= neg[0] == (1, 0);
        }
        assert!(saw_reverse);
    }

    #[test]
    fn zero_ratio_is_empty() {
        let g = DirectedGraph::from_edges(3, [(0, 1)]).unwrap();
        assert!(sample_negatives(&g, &[(0, 1)], 3, 0.0).unwrap().is_empty());
    }

    #[test]
    fn exhausted_when_every_pair_is_positive() {
        let all: Vec<_> = (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
        let g = DirectedGraph::from_edges(3, all.iter().copied()).unwrap();
        assert!(matches!(sample_negatives(&g, &all, 0, 1.0), Err(Error::SamplingExhausted { .. })));
    }

    #[test]
    fn labeled_pairs_cover_every_edge() {
        let g = DirectedGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let set = build_labeled_pairs(&g, 0.8, 1.0, 9).unwrap();
        set.validate(&g).unwrap();
        assert_eq!(set.pairs.iter().filter(|p| p.label).count(), 5);
        assert_eq!(set.pairs.iter().filter(|p| !p.label).count(), 5);
        assert_eq!(set.split(Split::Train).count(), 8);
    }

    #[test]
    fn validate_rejects_mislabeled_pairs() {
        let g = DirectedGraph::from_edges(3, [(0, 1)]).unwrap();
        let mut set = split_pairs(&[(0, 1)], 0.5, 0).unwrap();
        assert!(set.validate(&g).is_ok());
        set.add_split(&[(1, 2)], true, 0.5, 0).unwrap();
        assert!(set.validate(&g).is_err());
    }
}
