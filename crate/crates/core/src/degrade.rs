//! Qubit loss: superplaquette formation, superedge weights and loss
//! percolation.
//!
//! Losing a qubit makes its two plaquettes unmeasurable, but their product is
//! still a stabilizer. Merging plaquettes across every lost edge gives the
//! superplaquettes; two superplaquettes sharing `n` surviving qubits are joined
//! by one superedge whose flip probability is the odd-parity probability over
//! those `n` qubits.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use rand::Rng;

use crate::error::{check_probability, Error, Result};
use crate::lattice::ToricLattice;

#[derive(Debug, Clone, PartialEq)]
pub struct LossPattern {
    lost: Vec<bool>,
    p_loss: f64,
}

impl LossPattern {
    pub fn none(lattice: &ToricLattice) -> Self {
        Self {
            lost: vec![false; lattice.num_edges()],
            p_loss: 0.0,
        }
    }

    /// Explicit loss set; `p_loss` is recorded as the realised fraction.
    pub fn from_edges(lattice: &ToricLattice, edges: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut lost = vec![false; lattice.num_edges()];
        for e in edges {
            if e >= lost.len() {
                return Err(Error::IndexOutOfRange {
                    kind: "edge",
                    index: e,
                    limit: lost.len(),
                });
            }
            lost[e] = true;
        }
        let count = lost.iter().filter(|&&l| l).count();
        Ok(Self {
            p_loss: count as f64 / lost.len() as f64,
            lost,
        })
    }

    #[inline]
    pub fn is_lost(&self, edge: usize) -> bool {
        self.lost[edge]
    }

    pub fn mask(&self) -> &[bool] {
        &self.lost
    }

    pub fn lost_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.lost.iter().enumerate().filter(|(_, &l)| l).map(|(e, _)| e)
    }

    pub fn count(&self) -> usize {
        self.lost.iter().filter(|&&l| l).count()
    }

    pub fn p_loss(&self) -> f64 {
        self.p_loss
    }
}

/// Lose each edge independently with probability `p_loss`.
///
/// Exactly one uniform is drawn per edge, in edge order, so patterns for
/// different `p_loss` on the same stream are nested.
pub fn apply_losses<R: Rng + ?Sized>(
    lattice: &ToricLattice,
    p_loss: f64,
    rng: &mut R,
) -> Result<LossPattern> {
    check_probability("p_loss", p_loss)?;
    let lost = (0..lattice.num_edges())
        .map(|_| rng.random::<f64>() < p_loss)
        .collect();
    Ok(LossPattern { lost, p_loss })
}

/// Plaquette → superplaquette labels. The label of a superplaquette is its
/// smallest member plaquette id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    root: Vec<usize>,
}

impl Partition {
    #[inline]
    pub fn superplaquette(&self, plaquette: usize) -> usize {
        self.root[plaquette]
    }

    pub fn labels(&self) -> &[usize] {
        &self.root
    }

    pub fn members(&self, superplaquette: usize) -> Vec<usize> {
        (0..self.root.len())
            .filter(|&p| self.root[p] == superplaquette)
            .collect()
    }

    pub fn num_superplaquettes(&self) -> usize {
        self.root
            .iter()
            .enumerate()
            .filter(|&(p, &r)| p == r)
            .count()
    }
}

pub fn form_superplaquettes(lattice: &ToricLattice, loss: &LossPattern) -> Partition {
    let n = lattice.num_plaquettes();
    let mut uf = UnionFind::<usize>::new(n);
    for e in loss.lost_edges() {
        let [a, b] = lattice.edge_plaquettes(e);
        uf.union(a, b);
    }
    let mut smallest = vec![usize::MAX; n];
    for p in 0..n {
        let r = uf.find_mut(p);
        smallest[r] = smallest[r].min(p);
    }
    let root = (0..n).map(|p| smallest[uf.find_mut(p)]).collect();
    Partition { root }
}

/// Probability that an odd number of `n` qubits flip, each independently with
/// probability `p_comp`.
pub fn edge_flip_probability(multiplicity: usize, p_comp: f64) -> Result<f64> {
    if multiplicity == 0 {
        return Err(Error::Domain {
            name: "multiplicity",
            value: 0.0,
            domain: "n >= 1",
        });
    }
    if !(0.0..=0.5).contains(&p_comp) {
        return Err(Error::Domain {
            name: "p_comp",
            value: p_comp,
            domain: "[0, 1/2]",
        });
    }
    Ok((1.0 - (1.0 - 2.0 * p_comp).powi(multiplicity as i32)) / 2.0)
}

/// Log-odds weight `ln((1 - p) / p)` of an edge with flip probability `p`.
#[inline]
pub fn log_odds_weight(p: f64) -> f64 {
    ((1.0 - p) / p).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superedge {
    /// Compact node indices of the two superplaquettes, smaller first.
    pub nodes: (usize, usize),
    /// Surviving qubits shared by the two superplaquettes, ascending.
    pub edges: Vec<usize>,
    pub flip_probability: f64,
    pub weight: f64,
}

/// Surviving qubits between the same two superplaquettes are grouped into one
/// superedge only when they are homologically equivalent. On small lattices
/// or near loss percolation, two superplaquettes can together wrap the torus,
/// and the qubits joining them then fall into up to four classes, each its
/// own superedge.
impl Superedge {
    #[inline]
    pub fn multiplicity(&self) -> usize {
        self.edges.len()
    }

    /// Representative physical qubit used when a path crosses this superedge.
    #[inline]
    pub fn representative(&self) -> usize {
        self.edges[0]
    }

    #[inline]
    pub fn other(&self, node: usize) -> usize {
        if self.nodes.0 == node {
            self.nodes.1
        } else {
            self.nodes.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    Lost,
    /// Surviving edge between two plaquettes of one superplaquette.
    Internal,
    /// Surviving edge carried by the superedge with this index.
    Boundary(usize),
}

/// The lattice after loss: superplaquette graph plus the per-edge weights of
/// the restored square lattice.
#[derive(Debug, Clone)]
pub struct DegradedLattice {
    lattice: ToricLattice,
    loss: LossPattern,
    partition: Partition,
    p_comp: f64,
    /// plaquette -> compact node index
    node_of: Vec<usize>,
    /// compact node index -> superplaquette label
    labels: Vec<usize>,
    superedges: Vec<Superedge>,
    /// (label, label) with the smaller first -> superedge indices
    by_pair: HashMap<(usize, usize), Vec<usize>>,
    roles: Vec<EdgeRole>,
    /// node -> (neighbour node, superedge index)
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Spanning forest of each superplaquette over its lost edges:
    /// plaquette -> (parent plaquette, lost edge). Roots have `None`.
    loss_tree: Vec<Option<(usize, usize)>>,
    /// Test-line crossing bits of each plaquette's tree path to its root.
    root_crossing: Vec<u8>,
}

/// Build the degraded lattice and assign restored-lattice weights for
/// computational error rate `p_comp` in `(0, 1/2)`.
pub fn restored_weights(
    lattice: &ToricLattice,
    loss: &LossPattern,
    partition: &Partition,
    p_comp: f64,
) -> Result<DegradedLattice> {
    if !(p_comp > 0.0 && p_comp < 0.5) {
        return Err(Error::Domain {
            name: "p_comp",
            value: p_comp,
            domain: "(0, 1/2)",
        });
    }
    let n_plaq = lattice.num_plaquettes();
    let mut node_of = vec![usize::MAX; n_plaq];
    let mut labels = Vec::new();
    for p in 0..n_plaq {
        let r = partition.superplaquette(p);
        if r == p {
            node_of[p] = labels.len();
            labels.push(p);
        }
    }
    for p in 0..n_plaq {
        node_of[p] = node_of[partition.superplaquette(p)];
    }

    let loss_tree = loss_forest(lattice, loss, partition);
    let root_crossing = root_crossing(lattice, &loss_tree);

    let mut superedges: Vec<Superedge> = Vec::new();
    let mut by_class = HashMap::new();
    let mut roles = Vec::with_capacity(lattice.num_edges());
    for e in 0..lattice.num_edges() {
        if loss.is_lost(e) {
            roles.push(EdgeRole::Lost);
            continue;
        }
        let [p, q] = lattice.edge_plaquettes(e);
        let (a, b) = (node_of[p], node_of[q]);
        if a == b {
            roles.push(EdgeRole::Internal);
            continue;
        }
        let nodes = (a.min(b), a.max(b));
        let class = lattice.crossing_bits(e) ^ root_crossing[p] ^ root_crossing[q];
        let idx = *by_class.entry((nodes, class)).or_insert_with(|| {
            superedges.push(Superedge {
                nodes,
                edges: Vec::new(),
                flip_probability: 0.0,
                weight: 0.0,
            });
            superedges.len() - 1
        });
        superedges[idx].edges.push(e);
        roles.push(EdgeRole::Boundary(idx));
    }

    let mut adjacency = vec![Vec::new(); labels.len()];
    for (i, se) in superedges.iter_mut().enumerate() {
        se.flip_probability = edge_flip_probability(se.multiplicity(), p_comp)?;
        se.weight = log_odds_weight(se.flip_probability);
        adjacency[se.nodes.0].push((se.nodes.1, i));
        adjacency[se.nodes.1].push((se.nodes.0, i));
    }

    let mut by_pair: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, se) in superedges.iter().enumerate() {
        by_pair
            .entry((labels[se.nodes.0], labels[se.nodes.1]))
            .or_default()
            .push(i);
    }

    Ok(DegradedLattice {
        lattice: lattice.clone(),
        loss: loss.clone(),
        partition: partition.clone(),
        p_comp,
        node_of,
        labels,
        superedges,
        by_pair,
        roles,
        adjacency,
        loss_tree,
        root_crossing,
    })
}

fn loss_forest(
    lattice: &ToricLattice,
    loss: &LossPattern,
    partition: &Partition,
) -> Vec<Option<(usize, usize)>> {
    let n = lattice.num_plaquettes();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for p in 0..n {
        if partition.superplaquette(p) != p {
            continue;
        }
        seen[p] = true;
        queue.push_back(p);
        while let Some(u) = queue.pop_front() {
            for (v, e) in lattice.plaquette_neighbors(u) {
                if loss.is_lost(e) && !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, e));
                    queue.push_back(v);
                }
            }
        }
    }
    parent
}

fn root_crossing(lattice: &ToricLattice, loss_tree: &[Option<(usize, usize)>]) -> Vec<u8> {
    let mut bits: Vec<Option<u8>> = vec![None; loss_tree.len()];
    let mut stack = Vec::new();
    for p in 0..loss_tree.len() {
        let mut q = p;
        while bits[q].is_none() {
            match loss_tree[q] {
                Some((parent, _)) => {
                    stack.push(q);
                    q = parent;
                }
                None => bits[q] = Some(0),
            }
        }
        while let Some(q) = stack.pop() {
            let (parent, edge) = loss_tree[q].unwrap();
            bits[q] = Some(bits[parent].unwrap() ^ lattice.crossing_bits(edge));
        }
    }
    bits.into_iter().map(Option::unwrap).collect()
}

impl DegradedLattice {
    pub fn lattice(&self) -> &ToricLattice {
        &self.lattice
    }

    pub fn loss(&self) -> &LossPattern {
        &self.loss
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn p_comp(&self) -> f64 {
        self.p_comp
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    /// Compact node index of the superplaquette containing `plaquette`.
    #[inline]
    pub fn node_of_plaquette(&self, plaquette: usize) -> usize {
        self.node_of[plaquette]
    }

    /// Compact node index of a superplaquette label.
    #[inline]
    pub fn node_of_label(&self, label: usize) -> usize {
        self.node_of[label]
    }

    #[inline]
    pub fn label_of_node(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn superedges(&self) -> &[Superedge] {
        &self.superedges
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    #[inline]
    pub fn role(&self, edge: usize) -> EdgeRole {
        self.roles[edge]
    }

    /// Superedges between two superplaquette labels.
    pub fn superedges_between(&self, a: usize, b: usize) -> &[usize] {
        self.by_pair
            .get(&(a.min(b), a.max(b)))
            .map_or(&[], Vec::as_slice)
    }

    /// Surviving qubits shared by two superplaquette labels, over all their
    /// superedges.
    pub fn multiplicity(&self, a: usize, b: usize) -> Option<usize> {
        let between = self.superedges_between(a, b);
        (!between.is_empty()).then(|| between.iter().map(|&i| self.superedges[i].multiplicity()).sum())
    }

    /// Restored-lattice weight of a surviving edge; `None` for lost edges.
    pub fn edge_weight(&self, edge: usize) -> Option<f64> {
        match self.roles[edge] {
            EdgeRole::Lost => None,
            EdgeRole::Internal => Some(0.0),
            EdgeRole::Boundary(i) => Some(self.superedges[i].weight),
        }
    }

    pub fn internal_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.roles.len()).filter(|&e| self.roles[e] == EdgeRole::Internal)
    }

    /// Test-line crossing bits of the lost-edge tree path from `plaquette`
    /// to its superplaquette root.
    #[inline]
    pub fn root_crossing(&self, plaquette: usize) -> u8 {
        self.root_crossing[plaquette]
    }

    /// Parent link of `plaquette` in its superplaquette's lost-edge tree.
    #[inline]
    pub fn loss_tree_parent(&self, plaquette: usize) -> Option<(usize, usize)> {
        self.loss_tree[plaquette]
    }
}

/// Whether surviving qubits still support non-contractible cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LossBlocking {
    /// No surviving cycle winds vertically.
    pub vertical: bool,
    /// No surviving cycle winds horizontally.
    pub horizontal: bool,
}

impl LossBlocking {
    pub fn any(&self) -> bool {
        self.vertical || self.horizontal
    }
}

/// Union-find over stars that tracks each vertex's displacement from its root
/// in the universal cover, so closing a cycle reveals its winding.
struct WindingForest {
    parent: Vec<usize>,
    offset: Vec<(i64, i64)>,
}

impl WindingForest {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            offset: vec![(0, 0); n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, (i64, i64)) {
        let p = self.parent[x];
        if p == x {
            return (x, (0, 0));
        }
        let (root, off_p) = self.find(p);
        let off = (self.offset[x].0 + off_p.0, self.offset[x].1 + off_p.1);
        self.parent[x] = root;
        self.offset[x] = off;
        (root, off)
    }

    /// Join `a` and `b` where `pos(b) = pos(a) + step`. Returns the winding of
    /// the cycle closed by this edge, if any.
    fn link(&mut self, a: usize, b: usize, step: (i64, i64)) -> Option<(i64, i64)> {
        let (ra, oa) = self.find(a);
        let (rb, ob) = self.find(b);
        if ra == rb {
            let w = (oa.0 + step.0 - ob.0, oa.1 + step.1 - ob.1);
            return (w != (0, 0)).then_some(w);
        }
        // pos(rb) = pos(a) + step - ob = pos(ra) + oa + step - ob
        self.parent[rb] = ra;
        self.offset[rb] = (oa.0 + step.0 - ob.0, oa.1 + step.1 - ob.1);
        None
    }
}

/// Exact check for surviving non-contractible cycles in each direction.
pub fn detect_loss_percolation(lattice: &ToricLattice, loss: &LossPattern) -> LossBlocking {
    use crate::lattice::Orientation;
    let l = lattice.size() as i64;
    let mut forest = WindingForest::new(lattice.num_stars());
    let (mut wraps_v, mut wraps_h) = (false, false);
    for e in 0..lattice.num_edges() {
        if loss.is_lost(e) {
            continue;
        }
        let [a, b] = lattice.edge_stars(e);
        let step = match lattice.edge_coord(e).orientation {
            Orientation::Horizontal => (1, 0),
            Orientation::Vertical => (0, 1),
        };
        if let Some((dx, dy)) = forest.link(a, b, step) {
            debug_assert!(dx % l == 0 && dy % l == 0);
            wraps_h |= dx != 0;
            wraps_v |= dy != 0;
        }
    }
    LossBlocking {
        vertical: !wraps_v,
        horizontal: !wraps_h,
    }
}
