//! Loss-tolerant decoding of bit-flip errors on the toric code.
//!
//! Lost qubits merge plaquettes into superplaquettes; the surviving syndrome is
//! decoded by minimum-weight perfect matching on the superplaquette graph,
//! optionally rewarding path degeneracy, and success is read off the homology
//! class of the residual chain.

pub mod analysis;
pub mod degrade;
pub mod error;
pub mod homology;
pub mod lattice;
pub mod matching;
pub mod noise;
pub mod oracle;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
