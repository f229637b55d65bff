//! Syndrome graph with path degeneracies, and minimum-weight perfect matching.
//!
//! Distances are shortest paths on the superplaquette graph: nodes are
//! superplaquettes, and each superedge carries its log-odds weight. Walking
//! through a superplaquette's interior is free, so this is the same metric as
//! the restored lattice with zero-weight internal edges, but without
//! zero-weight cycles to confuse path counting.

pub mod blossom;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::degrade::DegradedLattice;
use crate::error::{Error, Result};
use crate::noise::{ChainRole, ErrorChain, Syndrome};

/// Relative tolerance for treating two accumulated path weights as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Path counts saturate here; only `ln D` enters the weights.
pub const DEGENERACY_CAP: u64 = 1 << 62;

#[inline]
pub(crate) fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Number of monotone lattice paths with `h` horizontal and `v` vertical
/// steps, saturating at [`DEGENERACY_CAP`].
pub fn path_degeneracy_square(h: u64, v: u64) -> u64 {
    let k = h.min(v) as u128;
    let n = (h + v) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
        if acc >= DEGENERACY_CAP as u128 {
            return DEGENERACY_CAP;
        }
    }
    acc as u64
}

/// `d - τ ln D`.
#[inline]
pub fn effective_weight(distance: f64, degeneracy: f64, tau: f64) -> f64 {
    distance - tau * degeneracy.ln()
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Complete graph on the flagged superplaquettes.
///
/// Pairs are addressed by syndrome index. Each pair `(i, j)` with `i < j` is
/// measured from `i`, whose distance field is kept for path reconstruction.
#[derive(Debug, Clone)]
pub struct SyndromeGraph {
    /// Compact superplaquette node of each syndrome node.
    nodes: Vec<usize>,
    tau: f64,
    distance: Vec<f64>,
    degeneracy: Vec<u64>,
    log_degeneracy: Vec<f64>,
    /// Per syndrome node, distances over the superplaquette graph. Filled by
    /// the search, or on first use when the closed form built the tables.
    /// Only settled nodes are finite.
    fields: Vec<OnceLock<Vec<f64>>>,
    /// Set when the tables came from the undamaged-lattice closed form.
    closed_form: bool,
}

impl SyndromeGraph {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.nodes.len() + j
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Compact superplaquette node of syndrome node `i`.
    pub fn node(&self, i: usize) -> usize {
        self.nodes[i]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance[self.at(i, j)]
    }

    /// Number of minimum-weight paths, saturating.
    pub fn degeneracy(&self, i: usize, j: usize) -> u64 {
        self.degeneracy[self.at(i, j)]
    }

    pub fn log_degeneracy(&self, i: usize, j: usize) -> f64 {
        self.log_degeneracy[self.at(i, j)]
    }

    pub fn effective_weight(&self, i: usize, j: usize) -> f64 {
        self.distance(i, j) - self.tau * self.log_degeneracy(i, j)
    }

    /// Copy of this graph with a different `τ`.
    pub fn with_tau(&self, tau: f64) -> SyndromeGraph {
        SyndromeGraph {
            tau,
            ..self.clone()
        }
    }

    /// Predecessors of superplaquette node `v` on minimum-weight paths for
    /// the pair `(i, j)`, as `(node, superedge)`. Paths run from
    /// `min(i, j)` to `max(i, j)`.
    pub fn predecessors(
        &self,
        degraded: &DegradedLattice,
        i: usize,
        j: usize,
        v: usize,
    ) -> Vec<(usize, usize)> {
        let field = self.field(degraded, i.min(j));
        let dv = field[v];
        let superedges = degraded.superedges();
        degraded
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&(u, se)| {
                field[u] < dv && ties(field[u] + superedges[se].weight, dv)
            })
            .collect()
    }

    fn field(&self, degraded: &DegradedLattice, i: usize) -> &[f64] {
        self.fields[i].get_or_init(|| {
            let mut search = Search::new(degraded.num_nodes());
            let rank = vec![usize::MAX; degraded.num_nodes()];
            search.run(degraded, self.nodes[i], &rank, 0, usize::MAX);
            search.field()
        })
    }

    /// `(source, target)` superplaquette nodes of the pair's paths.
    pub fn endpoints(&self, i: usize, j: usize) -> (usize, usize) {
        (self.nodes[i.min(j)], self.nodes[i.max(j)])
    }

    /// One minimum-weight path for the pair, as superedge indices from
    /// source to target. On the undamaged lattice the path runs along the
    /// row first, then the column, going in the positive direction when both
    /// ways round are equally short; otherwise ties go to the first
    /// neighbour in adjacency order.
    pub fn representative_path(&self, degraded: &DegradedLattice, i: usize, j: usize) -> Vec<usize> {
        let (source, target) = self.endpoints(i, j);
        if self.closed_form {
            return straight_path(degraded, source, target);
        }
        let mut path = Vec::new();
        let mut v = target;
        while v != source {
            let (u, se) = self.predecessors(degraded, i, j, v)[0];
            path.push(se);
            v = u;
        }
        path.reverse();
        path
    }
}

/// Reusable Dijkstra state for the per-source searches.
struct Search {
    dist: Vec<f64>,
    count: Vec<u64>,
    /// Path counts as floats; exact below 2^53 and far from overflow for any
    /// lattice this crate can hold, so `ln D` is taken from here.
    paths: Vec<f64>,
    settled: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<Entry>,
}

impl Search {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            count: vec![0; n],
            paths: vec![0.0; n],
            settled: vec![false; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.count[v] = 0;
            self.paths[v] = 0.0;
            self.settled[v] = false;
        }
        self.touched.clear();
        self.heap.clear();
    }

    /// Settle nodes from `source` until `remaining` nodes with
    /// `rank[v] > source_rank` have been settled.
    fn run(
        &mut self,
        degraded: &DegradedLattice,
        source: usize,
        rank: &[usize],
        source_rank: usize,
        mut remaining: usize,
    ) {
        self.reset();
        let superedges = degraded.superedges();
        self.dist[source] = 0.0;
        self.count[source] = 1;
        self.paths[source] = 1.0;
        self.touched.push(source);
        self.heap.push(Entry(0.0, source));
        while let Some(Entry(d, u)) = self.heap.pop() {
            if self.settled[u] || d > self.dist[u] {
                continue;
            }
            // Every predecessor of `u` is strictly closer, so its count is final.
            self.settled[u] = true;
            if rank[u] != usize::MAX && rank[u] > source_rank {
                remaining = remaining.saturating_sub(1);
                if remaining == 0 {
                    break;
                }
            }
            let (cu, pu) = (self.count[u], self.paths[u]);
            for &(v, se) in degraded.neighbors(u) {
                if self.settled[v] {
                    continue;
                }
                let nd = d + superedges[se].weight;
                let dv = self.dist[v];
                if dv.is_finite() && ties(nd, dv) {
                    self.count[v] = self.count[v].saturating_add(cu).min(DEGENERACY_CAP);
                    self.paths[v] += pu;
                } else if nd < dv {
                    if dv == f64::INFINITY {
                        self.touched.push(v);
                    }
                    self.dist[v] = nd;
                    self.count[v] = cu;
                    self.paths[v] = pu;
                    self.heap.push(Entry(nd, v));
                }
            }
        }
    }

    /// Settled distances; everything else is infinite.
    fn field(&self) -> Vec<f64> {
        let mut field = vec![f64::INFINITY; self.dist.len()];
        for &v in &self.touched {
            if self.settled[v] {
                field[v] = self.dist[v];
            }
        }
        field
    }
}

/// Pairwise distances `d_m` and degeneracies `D_m` between flagged
/// superplaquettes.
///
/// Without loss (and `L ≥ 3`, so that neighbouring plaquettes share a single
/// qubit) the tables come from the closed form on the square lattice;
/// otherwise from one shortest-path search per syndrome node.
pub fn build_syndrome_graph(
    degraded: &DegradedLattice,
    syndrome: &Syndrome,
    tau: f64,
) -> Result<SyndromeGraph> {
    if degraded.loss().count() == 0 && degraded.lattice().size() >= 3 {
        let mut graph = empty_graph(degraded, syndrome, tau)?;
        fill_closed_form(degraded, &mut graph);
        Ok(graph)
    } else {
        build_syndrome_graph_by_search(degraded, syndrome, tau)
    }
}

/// [`build_syndrome_graph`] that always runs the shortest-path searches.
pub fn build_syndrome_graph_by_search(
    degraded: &DegradedLattice,
    syndrome: &Syndrome,
    tau: f64,
) -> Result<SyndromeGraph> {
    let mut graph = empty_graph(degraded, syndrome, tau)?;
    let k = graph.len();
    let mut rank = vec![usize::MAX; degraded.num_nodes()];
    for (i, &v) in graph.nodes.iter().enumerate() {
        rank[v] = i;
    }
    let mut search = Search::new(degraded.num_nodes());
    for i in 0..k.saturating_sub(1) {
        search.run(degraded, graph.nodes[i], &rank, i, k - 1 - i);
        for j in i + 1..k {
            let t = graph.nodes[j];
            for (a, b) in [(i, j), (j, i)] {
                let idx = a * k + b;
                graph.distance[idx] = search.dist[t];
                graph.degeneracy[idx] = search.count[t];
                graph.log_degeneracy[idx] = search.paths[t].ln();
            }
        }
        let _ = graph.fields[i].set(search.field());
    }
    Ok(graph)
}

fn empty_graph(degraded: &DegradedLattice, syndrome: &Syndrome, tau: f64) -> Result<SyndromeGraph> {
    if !(tau >= 0.0) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            domain: "tau >= 0",
        });
    }
    let k = syndrome.len();
    if k % 2 == 1 {
        return Err(Error::OddParity(k));
    }
    Ok(SyndromeGraph {
        nodes: syndrome
            .flagged
            .iter()
            .map(|&label| degraded.node_of_label(label))
            .collect(),
        tau,
        distance: vec![0.0; k * k],
        degeneracy: vec![1; k * k],
        log_degeneracy: vec![0.0; k * k],
        fields: vec![OnceLock::new(); k],
        closed_form: false,
    })
}

/// Shortest offset along one periodic axis and the number of ways round
/// achieving it (two when exactly half way).
#[inline]
fn torus_offset(a: usize, b: usize, size: usize) -> (u64, u64) {
    let d = a.abs_diff(b);
    let d = d.min(size - d);
    (d as u64, if d > 0 && 2 * d == size { 2 } else { 1 })
}

fn fill_closed_form(degraded: &DegradedLattice, graph: &mut SyndromeGraph) {
    let lattice = degraded.lattice();
    let size = lattice.size();
    let weight = degraded.superedges()[0].weight;
    let k = graph.len();
    for i in 0..k {
        // Without loss, compact nodes are plaquette ids.
        let (ri, ci) = lattice.cell_coord(graph.nodes[i]);
        for j in i + 1..k {
            let (rj, cj) = lattice.cell_coord(graph.nodes[j]);
            let (h, wh) = torus_offset(ci, cj, size);
            let (v, wv) = torus_offset(ri, rj, size);
            let count = path_degeneracy_square(h, v)
                .saturating_mul(wh * wv)
                .min(DEGENERACY_CAP);
            let log_count = ln_binomial(h + v, v) + ((wh * wv) as f64).ln();
            for (a, b) in [(i, j), (j, i)] {
                let idx = a * k + b;
                graph.distance[idx] = (h + v) as f64 * weight;
                graph.degeneracy[idx] = count;
                graph.log_degeneracy[idx] = log_count;
            }
        }
    }
    graph.closed_form = true;
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// Row-then-column path between two plaquettes of the undamaged lattice.
fn straight_path(degraded: &DegradedLattice, source: usize, target: usize) -> Vec<usize> {
    use crate::degrade::EdgeRole;
    use crate::lattice::Orientation;
    let lattice = degraded.lattice();
    let size = lattice.size();
    let (mut r, mut c) = lattice.cell_coord(source);
    let (rt, ct) = lattice.cell_coord(target);
    let mut edges = Vec::new();
    let forward = |from: usize, to: usize| (to + size - from) % size <= (from + size - to) % size;
    if c != ct {
        let right = forward(c, ct);
        while c != ct {
            if right {
                c = (c + 1) % size;
                edges.push(lattice.edge_id(Orientation::Vertical, r, c));
            } else {
                edges.push(lattice.edge_id(Orientation::Vertical, r, c));
                c = (c + size - 1) % size;
            }
        }
    }
    if r != rt {
        let up = forward(r, rt);
        while r != rt {
            if up {
                r = (r + 1) % size;
                edges.push(lattice.edge_id(Orientation::Horizontal, r, c));
            } else {
                edges.push(lattice.edge_id(Orientation::Horizontal, r, c));
                r = (r + size - 1) % size;
            }
        }
    }
    edges
        .into_iter()
        .map(|e| match degraded.role(e) {
            EdgeRole::Boundary(se) => se,
            _ => unreachable!("undamaged lattice has only boundary edges"),
        })
        .collect()
}

/// A perfect matching of syndrome nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Pairs `(i, j)` with `i < j`, sorted.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of effective weights.
    pub weight: f64,
}

impl Matching {
    pub fn from_pairs(graph: &SyndromeGraph, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<_> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        let weight = pairs.iter().map(|&(a, b)| graph.effective_weight(a, b)).sum();
        Self { pairs, weight }
    }

    /// Total distance `Σ d_m`.
    pub fn distance(&self, graph: &SyndromeGraph) -> f64 {
        self.pairs.iter().map(|&(a, b)| graph.distance(a, b)).sum()
    }

    /// `ln D_M = Σ ln D_m`.
    pub fn log_degeneracy(&self, graph: &SyndromeGraph) -> f64 {
        self.pairs
            .iter()
            .map(|&(a, b)| graph.log_degeneracy(a, b))
            .sum()
    }
}

/// Exact minimum total effective weight perfect matching.
pub fn min_weight_perfect_matching(graph: &SyndromeGraph) -> Result<Matching> {
    let k = graph.len();
    if k % 2 == 1 {
        return Err(Error::OddParity(k));
    }
    if k == 0 {
        return Ok(Matching {
            pairs: Vec::new(),
            weight: 0.0,
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            let w = graph.effective_weight(i, j);
            lo = lo.min(w);
            hi = hi.max(w);
        }
    }
    // Maximise Σ (hi + 1 - w) over maximum-cardinality matchings. Every perfect
    // matching has k/2 pairs, so the shift does not move the optimum.
    let span = hi + 1.0 - lo;
    let scale = 1e12 / span;
    let mut edges = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let w = ((hi + 1.0 - graph.effective_weight(i, j)) * scale).round() as i64;
            edges.push((i, j, w));
        }
    }
    let mate = blossom::max_weight_matching(k, &edges, true);
    let pairs = mate
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let j = m.expect("complete graph has a perfect matching");
            (i < j).then_some((i, j))
        })
        .collect::<Vec<_>>();
    Ok(Matching::from_pairs(graph, pairs))
}

/// Correction chain: the symmetric difference of one representative path
/// per matched pair, each superedge contributing one physical qubit.
pub fn matching_to_correction(
    degraded: &DegradedLattice,
    graph: &SyndromeGraph,
    matching: &Matching,
) -> ErrorChain {
    let mut chain = ErrorChain::empty(degraded.lattice(), ChainRole::Correction);
    let superedges = degraded.superedges();
    for &(i, j) in &matching.pairs {
        for se in graph.representative_path(degraded, i, j) {
            chain.toggle(superedges[se].representative());
        }
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::{form_superplaquettes, restored_weights, LossPattern};
    use crate::lattice::{Orientation, ToricLattice};
    use crate::noise::compute_syndrome;

    fn undamaged(l: usize, p: f64) -> DegradedLattice {
        let lat = ToricLattice::new(l).unwrap();
        let loss = LossPattern::none(&lat);
        let part = form_superplaquettes(&lat, &loss);
        restored_weights(&lat, &loss, &part, p).unwrap()
    }

    fn syndrome(labels: &[usize]) -> Syndrome {
        let mut flagged = labels.to_vec();
        flagged.sort();
        Syndrome { flagged }
    }

    #[test]
    fn closed_form_agrees_with_search() {
        use crate::noise::{ChainRole, ErrorChain};
        for l in 3..=8 {
            let d = undamaged(l, 0.1);
            let n = l * l;
            // Every plaquette against a spread of partners.
            let labels: Vec<usize> = (0..n).step_by(1 + n / 10).collect();
            let labels = if labels.len() % 2 == 1 { &labels[1..] } else { &labels[..] };
            let s = syndrome(labels);
            let fast = build_syndrome_graph(&d, &s, 0.5).unwrap();
            let slow = build_syndrome_graph_by_search(&d, &s, 0.5).unwrap();
            assert!(fast.closed_form && !slow.closed_form);
            for i in 0..fast.len() {
                for j in 0..fast.len() {
                    if i == j {
                        continue;
                    }
                    assert!((fast.distance(i, j) - slow.distance(i, j)).abs() < 1e-9);
                    assert_eq!(fast.degeneracy(i, j), slow.degeneracy(i, j), "L={l} {i} {j}");
                    assert!((fast.log_degeneracy(i, j) - slow.log_degeneracy(i, j)).abs() < 1e-9);
                    let path = fast.representative_path(&d, i, j);
                    let mut chain = ErrorChain::empty(d.lattice(), ChainRole::Correction);
                    for se in &path {
                        chain.toggle(d.superedges()[*se].representative());
                    }
                    let weight: f64 = path.iter().map(|&se| d.superedges()[se].weight).sum();
                    assert!((weight - fast.distance(i, j)).abs() < 1e-9);
                    let mut ends = vec![labels[i], labels[j]];
                    ends.sort();
                    assert_eq!(compute_syndrome(&d, &chain).flagged, ends);
                    // Lazily built fields agree with the eager ones.
                    let pf = fast.predecessors(&d, i, j, fast.nodes[j.max(i)]);
                    let ps = slow.predecessors(&d, i, j, slow.nodes[j.max(i)]);
                    assert_eq!(pf, ps);
                }
            }
        }
    }

    #[test]
    fn binomial_degeneracy() {
        assert_eq!(path_degeneracy_square(1, 2), 3);
        assert_eq!(path_degeneracy_square(0, 5), 1);
        assert_eq!(path_degeneracy_square(2, 2), 6);
        assert_eq!(path_degeneracy_square(10, 10), 184_756);
        assert_eq!(path_degeneracy_square(100, 100), DEGENERACY_CAP);
    }

    #[test]
    fn effective_weight_arithmetic() {
        assert_eq!(effective_weight(4.0, 1.0, 3.0), 4.0);
        assert_eq!(effective_weight(4.0, 7.0, 0.0), 4.0);
        assert!((effective_weight(6.0, 9.0, 1.0) - 3.8028).abs() < 1e-4);
    }

    #[test]
    fn adjacent_and_diagonal_pairs() {
        let dl = undamaged(6, 0.1);
        let lat = dl.lattice();
        let ln9 = 9f64.ln();
        let a = lat.cell_id(2, 2);
        let g = build_syndrome_graph(&dl, &syndrome(&[a, lat.cell_id(2, 3)]), 0.0).unwrap();
        assert!((g.distance(0, 1) - ln9).abs() < 1e-12);
        assert_eq!(g.degeneracy(0, 1), 1);
        let g = build_syndrome_graph(&dl, &syndrome(&[a, lat.cell_id(3, 3)]), 0.0).unwrap();
        assert!((g.distance(0, 1) - 2.0 * ln9).abs() < 1e-12);
        assert_eq!(g.degeneracy(0, 1), 2);
    }

    #[test]
    fn interior_of_superplaquette_is_free() {
        // A horizontal domino of two plaquettes; flag the plaquettes left and
        // right of it.
        let lat = ToricLattice::new(6).unwrap();
        let lost = lat.edge_id(Orientation::Vertical, 2, 3);
        let loss = LossPattern::from_edges(&lat, [lost]).unwrap();
        let part = form_superplaquettes(&lat, &loss);
        let dl = restored_weights(&lat, &loss, &part, 0.1).unwrap();
        let s = syndrome(&[lat.cell_id(2, 1), lat.cell_id(2, 4)]);
        let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
        assert!((g.distance(0, 1) - 2.0 * 9f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn odd_syndrome_is_rejected() {
        let dl = undamaged(4, 0.1);
        assert!(matches!(
            build_syndrome_graph(&dl, &syndrome(&[0, 1, 2]), 0.0),
            Err(Error::OddParity(3))
        ));
        assert!(build_syndrome_graph(&dl, &syndrome(&[0, 1]), -1.0).is_err());
    }

    #[test]
    fn matching_prefers_short_pairs() {
        let dl = undamaged(8, 0.1);
        let lat = dl.lattice();
        let s = syndrome(&[
            lat.cell_id(0, 0),
            lat.cell_id(0, 1),
            lat.cell_id(4, 4),
            lat.cell_id(4, 5),
        ]);
        let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
        let m = min_weight_perfect_matching(&g).unwrap();
        assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
        let correction = matching_to_correction(&dl, &g, &m);
        assert_eq!(correction.len(), 2);
        assert_eq!(compute_syndrome(&dl, &correction), s);
    }

    #[test]
    fn adjacent_pair_is_corrected_by_shared_edge() {
        let dl = undamaged(5, 0.1);
        let lat = dl.lattice();
        let e = lat.edge_id(Orientation::Horizontal, 3, 1);
        let s = syndrome(&lat.edge_plaquettes(e));
        let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
        let m = min_weight_perfect_matching(&g).unwrap();
        let c = matching_to_correction(&dl, &g, &m);
        assert_eq!(c.edges().collect::<Vec<_>>(), vec![e]);
    }

    #[test]
    fn long_pair_wraps_around() {
        let dl = undamaged(6, 0.1);
        let lat = dl.lattice();
        let s = syndrome(&[lat.cell_id(1, 0), lat.cell_id(1, 5)]);
        let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
        assert!((g.distance(0, 1) - 9f64.ln()).abs() < 1e-12);
        let m = min_weight_perfect_matching(&g).unwrap();
        let c = matching_to_correction(&dl, &g, &m);
        assert_eq!(
            c.edges().collect::<Vec<_>>(),
            vec![lat.edge_id(Orientation::Vertical, 1, 0)]
        );
    }

    #[test]
    fn half_way_pairs_count_both_windings() {
        let dl = undamaged(6, 0.1);
        let lat = dl.lattice();
        let s = syndrome(&[lat.cell_id(0, 0), lat.cell_id(0, 3)]);
        let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
        assert_eq!(g.degeneracy(0, 1), 2);
        let s = syndrome(&[lat.cell_id(0, 0), lat.cell_id(3, 1)]);
        let g = build_syndrome_graph(&dl, &s, 0.0).unwrap();
        assert_eq!(g.degeneracy(0, 1), 2 * path_degeneracy_square(3, 1));
    }

    #[test]
    fn degeneracy_weighting_picks_the_nine_fold_matching() {
        let dl = undamaged(8, 0.1);
        let lat = dl.lattice();
        let labels = [
            lat.cell_id(0, 0),
            lat.cell_id(0, 3),
            lat.cell_id(2, 1),
            lat.cell_id(2, 4),
        ];
        let g = build_syndrome_graph(&dl, &syndrome(&labels), 1.0).unwrap();
        let m = min_weight_perfect_matching(&g).unwrap();
        assert_eq!(m.pairs, vec![(0, 2), (1, 3)]);
        assert!((m.log_degeneracy(&g) - 9f64.ln()).abs() < 1e-12);
    }
}
