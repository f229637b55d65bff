//! Homology class of residual chains and the per-trial failure rule.
//!
//! A chain with empty superplaquette syndrome may still have odd plaquettes
//! inside superplaquettes. It is closed by joining each odd plaquette to its
//! superplaquette root along the lost-edge spanning tree; the tree path only
//! uses lost edges, so the closure is unobservable and the class is well
//! defined whenever loss leaves logical cycles to measure with.

use crate::degrade::{DegradedLattice, LossBlocking};
use crate::error::{Error, Result};
use crate::lattice::{Axis, ToricLattice};
use crate::noise::{ChainRole, ErrorChain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HomologyClass {
    /// Parity of crossings with the horizontal edges of row 0.
    pub wrap_v: bool,
    /// Parity of crossings with the vertical edges of column 0.
    pub wrap_h: bool,
}

impl HomologyClass {
    pub fn is_trivial(&self) -> bool {
        !self.wrap_v && !self.wrap_h
    }

    /// Two-bit code `wrap_v | wrap_h << 1`.
    pub fn bits(&self) -> usize {
        self.wrap_v as usize | (self.wrap_h as usize) << 1
    }

    pub fn from_bits(bits: usize) -> Self {
        Self {
            wrap_v: bits & 1 != 0,
            wrap_h: bits & 2 != 0,
        }
    }

    pub fn sum(&self, other: &HomologyClass) -> HomologyClass {
        Self::from_bits(self.bits() ^ other.bits())
    }
}

/// Class of a chain with empty plaquette boundary, by test-line parity.
pub fn homology_class(lattice: &ToricLattice, chain: &ErrorChain) -> Result<HomologyClass> {
    let boundary = chain.plaquette_boundary(lattice);
    if !boundary.is_empty() {
        return Err(Error::NotClosed(boundary.len()));
    }
    let mut class = HomologyClass::default();
    for e in chain.edges() {
        class.wrap_v ^= lattice.on_test_line(Axis::Vertical, e);
        class.wrap_h ^= lattice.on_test_line(Axis::Horizontal, e);
    }
    Ok(class)
}

/// Add lost-edge tree paths so that every odd plaquette is paired within its
/// superplaquette. Fails if some superplaquette has odd parity.
pub fn close_within_superplaquettes(
    degraded: &DegradedLattice,
    chain: &ErrorChain,
) -> Result<ErrorChain> {
    let lattice = degraded.lattice();
    let mut closed = chain.clone();
    closed.role = ChainRole::Closed;
    for p in chain.plaquette_boundary(lattice) {
        let mut q = p;
        while let Some((parent, edge)) = degraded.loss_tree_parent(q) {
            closed.toggle(edge);
            q = parent;
        }
    }
    let open = closed.plaquette_boundary(lattice);
    if !open.is_empty() {
        return Err(Error::NotClosed(open.len()));
    }
    Ok(closed)
}

/// Class of a chain whose superplaquette syndrome is empty.
pub fn residual_class(degraded: &DegradedLattice, chain: &ErrorChain) -> Result<HomologyClass> {
    let closed = close_within_superplaquettes(degraded, chain)?;
    homology_class(degraded.lattice(), &closed)
}

/// Per-edge crossing bits with the tree closure folded in, so the class of a
/// chain with empty superplaquette syndrome is the XOR over its edges.
#[derive(Debug, Clone)]
pub struct CrossingTable {
    bits: Vec<u8>,
}

impl CrossingTable {
    pub fn new(degraded: &DegradedLattice) -> Self {
        let lattice = degraded.lattice();
        let bits = (0..lattice.num_edges())
            .map(|e| {
                let [p, q] = lattice.edge_plaquettes(e);
                lattice.crossing_bits(e) ^ degraded.root_crossing(p) ^ degraded.root_crossing(q)
            })
            .collect();
        Self { bits }
    }

    #[inline]
    pub fn edge(&self, edge: usize) -> u8 {
        self.bits[edge]
    }

    pub fn class_of(&self, edges: impl IntoIterator<Item = usize>) -> HomologyClass {
        HomologyClass::from_bits(edges.into_iter().fold(0, |acc, e| acc ^ self.bits[e]) as usize)
    }
}


/// A trial fails on any nontrivial class, or when loss has removed every
/// logical cycle in some direction.
pub fn trial_failed(class: HomologyClass, blocking: LossBlocking) -> bool {
    !class.is_trivial() || blocking.any()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::{form_superplaquettes, restored_weights, LossPattern};
    use crate::lattice::Orientation;
    use crate::noise::compute_syndrome;

    #[test]
    fn empty_chain_is_trivial() {
        let lat = ToricLattice::new(4).unwrap();
        let c = ErrorChain::empty(&lat, ChainRole::Closed);
        assert!(homology_class(&lat, &c).unwrap().is_trivial());
    }

    #[test]
    fn straight_wraps() {
        let lat = ToricLattice::new(5).unwrap();
        // A row of vertical edges runs horizontally across the dual lattice.
        let row = (0..5).map(|c| lat.edge_id(Orientation::Vertical, 2, c));
        let c = ErrorChain::from_edges(&lat, ChainRole::Closed, row);
        let class = homology_class(&lat, &c).unwrap();
        assert!(class.wrap_h && !class.wrap_v);
        let col = (0..5).map(|r| lat.edge_id(Orientation::Horizontal, r, 3));
        let c = ErrorChain::from_edges(&lat, ChainRole::Closed, col);
        let class = homology_class(&lat, &c).unwrap();
        assert!(class.wrap_v && !class.wrap_h);
    }

    #[test]
    fn star_boundary_is_trivial_and_open_chain_is_rejected() {
        let lat = ToricLattice::new(4).unwrap();
        let c = ErrorChain::from_edges(&lat, ChainRole::Closed, lat.star_edges(0));
        assert!(homology_class(&lat, &c).unwrap().is_trivial());
        let open = ErrorChain::from_edges(&lat, ChainRole::Closed, [3]);
        assert_eq!(homology_class(&lat, &open), Err(Error::NotClosed(2)));
    }

    #[test]
    fn failure_rule() {
        let none = LossBlocking::default();
        assert!(!trial_failed(HomologyClass::default(), none));
        assert!(trial_failed(HomologyClass::from_bits(1), none));
        let blocked = LossBlocking {
            vertical: true,
            horizontal: false,
        };
        assert!(trial_failed(HomologyClass::default(), blocked));
    }

    #[test]
    fn closure_and_crossing_table_agree() {
        let lat = ToricLattice::new(6).unwrap();
        let lost = [
            lat.edge_id(Orientation::Horizontal, 0, 2),
            lat.edge_id(Orientation::Vertical, 0, 2),
            lat.edge_id(Orientation::Horizontal, 1, 2),
            lat.edge_id(Orientation::Vertical, 5, 0),
        ];
        let loss = LossPattern::from_edges(&lat, lost).unwrap();
        let part = form_superplaquettes(&lat, &loss);
        let dl = restored_weights(&lat, &loss, &part, 0.1).unwrap();
        let table = CrossingTable::new(&dl);
        let survivors: Vec<_> = (0..lat.num_edges()).filter(|&e| !loss.is_lost(e)).collect();
        // Pairs of surviving edges: whenever the superplaquette syndrome is
        // empty both routes must give the same class.
        for (i, &a) in survivors.iter().enumerate() {
            for &b in &survivors[i..] {
                let c = ErrorChain::from_edges(&lat, ChainRole::Closed, [a, b]);
                if !compute_syndrome(&dl, &c).is_empty() {
                    assert!(residual_class(&dl, &c).is_err());
                    continue;
                }
                assert_eq!(residual_class(&dl, &c).unwrap(), table.class_of(c.edges()));
            }
        }
    }
}
