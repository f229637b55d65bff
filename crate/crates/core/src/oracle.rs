//! Brute-force references: exhaustive matching enumeration, the exact
//! failure expectation when minimum-distance matchings are chosen with
//! probability proportional to their degeneracy, a Monte Carlo sampler of
//! that same rule, and the vertex-relabeling experiment.

use std::collections::BTreeMap;

use rand::Rng;

use crate::degrade::DegradedLattice;
use crate::error::{Error, Result};
use crate::homology::{residual_class, CrossingTable, HomologyClass};
use crate::matching::{
    build_syndrome_graph, matching_to_correction, min_weight_perfect_matching, ties, Matching,
    SyndromeGraph,
};
use crate::noise::{compute_syndrome, ChainRole, ErrorChain, Syndrome};

/// Largest syndrome handed to the enumerator.
pub const MAX_ENUMERATED_NODES: usize = 12;

#[derive(Debug, Clone)]
pub struct EnsembleEntry {
    pub matching: Matching,
    /// `Σ d_m` over the pairs.
    pub distance: f64,
    /// `ln D_M`.
    pub log_degeneracy: f64,
}

#[derive(Debug, Clone)]
pub struct MatchingEnsemble {
    pub entries: Vec<EnsembleEntry>,
    /// Indices of the minimum-distance entries.
    pub minimal: Vec<usize>,
    /// `ln 𝒟_E`, summed over the minimum-distance entries.
    pub log_total_degeneracy: f64,
}

impl MatchingEnsemble {
    /// `D_M / 𝒟_E` for each minimum-distance entry, in `minimal` order.
    pub fn fair_probabilities(&self) -> Vec<f64> {
        self.minimal
            .iter()
            .map(|&i| (self.entries[i].log_degeneracy - self.log_total_degeneracy).exp())
            .collect()
    }

    /// Smallest effective weight over all entries.
    pub fn min_weight(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.matching.weight)
            .fold(f64::INFINITY, f64::min)
    }
}

fn pairings(remaining: &mut Vec<usize>, current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if remaining.is_empty() {
        out.push(current.clone());
        return;
    }
    let first = remaining.remove(0);
    for k in 0..remaining.len() {
        let partner = remaining.remove(k);
        current.push((first, partner));
        pairings(remaining, current, out);
        current.pop();
        remaining.insert(k, partner);
    }
    remaining.insert(0, first);
}

/// Every perfect matching of the syndrome graph.
pub fn enumerate_matchings(graph: &SyndromeGraph) -> Result<MatchingEnsemble> {
    let k = graph.len();
    if k > MAX_ENUMERATED_NODES {
        return Err(Error::TooLarge {
            nodes: k,
            limit: MAX_ENUMERATED_NODES,
        });
    }
    if k % 2 == 1 {
        return Err(Error::OddParity(k));
    }
    let mut all = Vec::new();
    pairings(&mut (0..k).collect(), &mut Vec::new(), &mut all);
    let entries: Vec<EnsembleEntry> = all
        .into_iter()
        .map(|pairs| {
            let matching = Matching::from_pairs(graph, pairs);
            EnsembleEntry {
                distance: matching.distance(graph),
                log_degeneracy: matching.log_degeneracy(graph),
                matching,
            }
        })
        .collect();
    let best = entries
        .iter()
        .map(|e| e.distance)
        .fold(f64::INFINITY, f64::min);
    let minimal: Vec<usize> = (0..entries.len())
        .filter(|&i| ties(entries[i].distance, best))
        .collect();
    let log_total_degeneracy = minimal
        .iter()
        .map(|&i| entries[i].log_degeneracy)
        .fold(f64::NEG_INFINITY, |acc, x| {
            if acc == f64::NEG_INFINITY {
                x
            } else {
                let m = acc.max(x);
                m + ((acc - m).exp() + (x - m).exp()).ln()
            }
        });
    Ok(MatchingEnsemble {
        entries,
        minimal,
        log_total_degeneracy,
    })
}

/// Number of minimum-weight paths from the pair's source to every settled
/// node, by class of the path's crossing bits.
struct PathCounts {
    /// node -> paths per class
    by_class: Vec<Option<[f64; 4]>>,
}

impl PathCounts {
    fn to(
        &mut self,
        degraded: &DegradedLattice,
        graph: &SyndromeGraph,
        table: &CrossingTable,
        (i, j): (usize, usize),
        v: usize,
    ) -> [f64; 4] {
        if let Some(c) = self.by_class[v] {
            return c;
        }
        let mut out = [0.0; 4];
        for (u, se) in graph.predecessors(degraded, i, j, v) {
            let bits = table.edge(degraded.superedges()[se].representative()) as usize;
            let from = self.to(degraded, graph, table, (i, j), u);
            for (c, &n) in from.iter().enumerate() {
                out[c ^ bits] += n;
            }
        }
        self.by_class[v] = Some(out);
        out
    }
}

/// Fraction of the pair's minimum-weight paths in each crossing class.
pub fn pair_class_distribution(
    degraded: &DegradedLattice,
    graph: &SyndromeGraph,
    table: &CrossingTable,
    i: usize,
    j: usize,
) -> [f64; 4] {
    let (source, target) = graph.endpoints(i, j);
    let mut counts = PathCounts {
        by_class: vec![None; degraded.num_nodes()],
    };
    counts.by_class[source] = Some([1.0, 0.0, 0.0, 0.0]);
    let raw = counts.to(degraded, graph, table, (i, j), target);
    let total: f64 = raw.iter().sum();
    raw.map(|n| n / total)
}

fn xor_convolve(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for x in 0..4 {
        for y in 0..4 {
            out[x ^ y] += a[x] * b[y];
        }
    }
    out
}

/// Probability that `E ⊕ E′` is homologically nontrivial when `E′` is drawn
/// by picking a minimum-distance matching with probability `D_M / 𝒟_E` and
/// then one of its minimum-weight paths per pair uniformly.
///
/// Classes are tracked per path rather than per matching: on even lattices a
/// pair half way around the torus has minimum paths of both windings.
pub fn exact_failure_expectation(degraded: &DegradedLattice, error: &ErrorChain) -> Result<f64> {
    let syndrome = compute_syndrome(degraded, error);
    if syndrome.is_empty() {
        return Ok(0.0);
    }
    let graph = build_syndrome_graph(degraded, &syndrome, 0.0)?;
    let ensemble = enumerate_matchings(&graph)?;
    let table = CrossingTable::new(degraded);
    let base = table.class_of(error.edges()).bits();
    let mut pair_cache: BTreeMap<(usize, usize), [f64; 4]> = BTreeMap::new();
    let mut expectation = 0.0;
    for (&idx, weight) in ensemble.minimal.iter().zip(ensemble.fair_probabilities()) {
        let mut dist = [1.0, 0.0, 0.0, 0.0];
        for &(i, j) in &ensemble.entries[idx].matching.pairs {
            let pd = *pair_cache
                .entry((i, j))
                .or_insert_with(|| pair_class_distribution(degraded, &graph, &table, i, j));
            dist = xor_convolve(dist, pd);
        }
        expectation += weight * (1.0 - dist[base]);
    }
    Ok(expectation)
}

/// Draw one minimum-weight path for the pair uniformly, as physical edges
/// (one representative per superedge).
fn sample_path<R: Rng + ?Sized>(
    degraded: &DegradedLattice,
    graph: &SyndromeGraph,
    (i, j): (usize, usize),
    totals: &mut Vec<Option<f64>>,
    rng: &mut R,
) -> Vec<usize> {
    fn count(
        degraded: &DegradedLattice,
        graph: &SyndromeGraph,
        (i, j): (usize, usize),
        v: usize,
        totals: &mut Vec<Option<f64>>,
    ) -> f64 {
        if let Some(n) = totals[v] {
            return n;
        }
        let n = graph
            .predecessors(degraded, i, j, v)
            .into_iter()
            .map(|(u, _)| count(degraded, graph, (i, j), u, totals))
            .sum();
        totals[v] = Some(n);
        n
    }
    let (source, target) = graph.endpoints(i, j);
    totals.iter_mut().for_each(|t| *t = None);
    totals[source] = Some(1.0);
    let mut edges = Vec::new();
    let mut v = target;
    while v != source {
        let preds = graph.predecessors(degraded, i, j, v);
        let weights: Vec<f64> = preds
            .iter()
            .map(|&(u, _)| count(degraded, graph, (i, j), u, totals))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut x = rng.random::<f64>() * total;
        let mut pick = preds.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if x < *w {
                pick = k;
                break;
            }
            x -= w;
        }
        let (u, se) = preds[pick];
        edges.push(degraded.superedges()[se].representative());
        v = u;
    }
    edges
}

/// Monte Carlo counterpart of [`exact_failure_expectation`]: number of
/// nontrivial residual classes over `draws` random corrections. Classes are
/// computed by explicit closure and test-line counting.
pub fn sample_fair_failures<R: Rng + ?Sized>(
    degraded: &DegradedLattice,
    error: &ErrorChain,
    draws: usize,
    rng: &mut R,
) -> Result<usize> {
    let syndrome = compute_syndrome(degraded, error);
    if syndrome.is_empty() {
        let class = residual_class(degraded, error)?;
        return Ok(if class.is_trivial() { 0 } else { draws });
    }
    let graph = build_syndrome_graph(degraded, &syndrome, 0.0)?;
    let ensemble = enumerate_matchings(&graph)?;
    let probs = ensemble.fair_probabilities();
    let mut totals = vec![None; degraded.num_nodes()];
    let mut failures = 0;
    for _ in 0..draws {
        let mut x = rng.random::<f64>();
        let mut pick = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            if x < *p {
                pick = k;
                break;
            }
            x -= p;
        }
        let matching = &ensemble.entries[ensemble.minimal[pick]].matching;
        let mut residual = error.clone();
        for &pair in &matching.pairs {
            for e in sample_path(degraded, &graph, pair, &mut totals, rng) {
                residual.toggle(e);
            }
        }
        if !residual_class(degraded, &residual)?.is_trivial() {
            failures += 1;
        }
    }
    Ok(failures)
}

/// Run the solver once per ordering of the syndrome labels and count the
/// matchings returned, as sorted label pairs.
pub fn presentation_bias_test(
    degraded: &DegradedLattice,
    labels: &[usize],
    tau: f64,
) -> Result<BTreeMap<Vec<(usize, usize)>, usize>> {
    if labels.len() > 8 {
        return Err(Error::TooLarge {
            nodes: labels.len(),
            limit: 8,
        });
    }
    let mut histogram = BTreeMap::new();
    for order in permutations(labels) {
        let syndrome = Syndrome {
            flagged: order.clone(),
        };
        let graph = build_syndrome_graph(degraded, &syndrome, tau)?;
        let matching = min_weight_perfect_matching(&graph)?;
        let mut pairs: Vec<(usize, usize)> = matching
            .pairs
            .iter()
            .map(|&(i, j)| (order[i].min(order[j]), order[i].max(order[j])))
            .collect();
        pairs.sort_unstable();
        *histogram.entry(pairs).or_insert(0) += 1;
    }
    Ok(histogram)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Decode `error` with the solver at the given `τ` and report the residual
/// class. Used to compare the solver against the enumerated ensemble.
pub fn decode_class(degraded: &DegradedLattice, error: &ErrorChain, tau: f64) -> Result<HomologyClass> {
    let syndrome = compute_syndrome(degraded, error);
    let graph = build_syndrome_graph(degraded, &syndrome, tau)?;
    let matching = min_weight_perfect_matching(&graph)?;
    let correction = matching_to_correction(degraded, &graph, &matching);
    residual_class(degraded, &error.sum(&correction, ChainRole::Closed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::{form_superplaquettes, restored_weights, LossPattern};
    use crate::lattice::ToricLattice;

    fn undamaged(l: usize) -> DegradedLattice {
        let lat = ToricLattice::new(l).unwrap();
        let loss = LossPattern::none(&lat);
        let part = form_superplaquettes(&lat, &loss);
        restored_weights(&lat, &loss, &part, 0.1).unwrap()
    }

    #[test]
    fn matching_counts_are_double_factorials() {
        let dl = undamaged(8);
        for (k, expected) in [(2, 1), (4, 3), (6, 15), (8, 105)] {
            let s = Syndrome {
                flagged: (0..k).map(|i| i * 7).collect(),
            };
            let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
            assert_eq!(enumerate_matchings(&g).unwrap().entries.len(), expected);
        }
    }

    #[test]
    fn enumeration_limit() {
        let dl = undamaged(8);
        let s = Syndrome {
            flagged: (0..14).map(|i| i * 4).collect(),
        };
        let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
        assert!(matches!(enumerate_matchings(&g), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn empty_error_never_fails() {
        let dl = undamaged(4);
        let e = ErrorChain::empty(dl.lattice(), ChainRole::Error);
        assert_eq!(exact_failure_expectation(&dl, &e).unwrap(), 0.0);
    }

    #[test]
    fn permutations_are_complete() {
        let p = permutations(&[1, 2, 3, 4]);
        assert_eq!(p.len(), 24);
        let mut sorted = p.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
    }
}
