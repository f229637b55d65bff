//! Bit-flip errors on surviving qubits and their superplaquette syndrome.

use rand::Rng;

use crate::degrade::{DegradedLattice, LossPattern};
use crate::error::{Error, Result};
use crate::lattice::ToricLattice;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainRole {
    /// Errors that actually happened.
    Error,
    /// Correction proposed by the decoder.
    Correction,
    /// Sum of error and correction.
    Closed,
}

/// A set of edges, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorChain {
    flipped: Vec<bool>,
    pub role: ChainRole,
}

impl ErrorChain {
    pub fn empty(lattice: &ToricLattice, role: ChainRole) -> Self {
        Self {
            flipped: vec![false; lattice.num_edges()],
            role,
        }
    }

    pub fn from_edges(
        lattice: &ToricLattice,
        role: ChainRole,
        edges: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut chain = Self::empty(lattice, role);
        for e in edges {
            chain.toggle(e);
        }
        chain
    }

    #[inline]
    pub fn contains(&self, edge: usize) -> bool {
        self.flipped[edge]
    }

    #[inline]
    pub fn toggle(&mut self, edge: usize) {
        self.flipped[edge] ^= true;
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.flipped
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(e, _)| e)
    }

    pub fn len(&self) -> usize {
        self.flipped.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.flipped.iter().any(|&f| f)
    }

    /// Symmetric difference.
    pub fn sum(&self, other: &ErrorChain, role: ChainRole) -> ErrorChain {
        ErrorChain {
            flipped: self
                .flipped
                .iter()
                .zip(&other.flipped)
                .map(|(a, b)| a ^ b)
                .collect(),
            role,
        }
    }

    /// Plaquettes touched by an odd number of chain edges.
    pub fn plaquette_boundary(&self, lattice: &ToricLattice) -> Vec<usize> {
        let mut parity = vec![false; lattice.num_plaquettes()];
        for e in self.edges() {
            for p in lattice.edge_plaquettes(e) {
                parity[p] ^= true;
            }
        }
        (0..parity.len()).filter(|&p| parity[p]).collect()
    }
}

/// Superplaquettes with eigenvalue −1, as sorted superplaquette labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Syndrome {
    pub flagged: Vec<usize>,
}

impl Syndrome {
    pub fn len(&self) -> usize {
        self.flagged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn sum(&self, other: &Syndrome) -> Syndrome {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.flagged, &other.flagged);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    out.push(*x);
                    i += 1;
                }
                (Some(x), None) => {
                    out.push(*x);
                    i += 1;
                }
                (_, Some(y)) => {
                    out.push(*y);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Syndrome { flagged: out }
    }
}

/// Flip each surviving qubit independently with probability `p_comp`.
///
/// One uniform is drawn for every edge, lost or not, so the error pattern on
/// a given stream does not depend on the loss pattern, and patterns for
/// increasing `p_comp` are nested.
pub fn sample_errors<R: Rng + ?Sized>(
    loss: &LossPattern,
    p_comp: f64,
    rng: &mut R,
) -> Result<ErrorChain> {
    if !(0.0..=0.5).contains(&p_comp) {
        return Err(Error::Domain {
            name: "p_comp",
            value: p_comp,
            domain: "[0, 1/2]",
        });
    }
    let flipped = loss
        .mask()
        .iter()
        .map(|&lost| {
            let u: f64 = rng.random();
            !lost && u < p_comp
        })
        .collect();
    Ok(ErrorChain {
        flipped,
        role: ChainRole::Error,
    })
}

/// Each flipped edge toggles the superplaquettes on either side; an edge
/// inside one superplaquette toggles it twice.
pub fn compute_syndrome(degraded: &DegradedLattice, chain: &ErrorChain) -> Syndrome {
    let lattice = degraded.lattice();
    let partition = degraded.partition();
    let mut parity = vec![false; lattice.num_plaquettes()];
    for e in chain.edges() {
        for p in lattice.edge_plaquettes(e) {
            parity[partition.superplaquette(p)] ^= true;
        }
    }
    Syndrome {
        flagged: (0..parity.len()).filter(|&s| parity[s]).collect(),
    }
}
