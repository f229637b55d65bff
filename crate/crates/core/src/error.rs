use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice size must be at least 2, got {0}")]
    InvalidSize(usize),

    #[error("{kind} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("{name} = {value} outside its valid domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("syndrome graph has an odd number of nodes ({0})")]
    OddParity(usize),

    #[error("chain is not closed: {0} plaquettes on its boundary")]
    NotClosed(usize),

    #[error("instance has {nodes} syndrome nodes; enumeration is limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("curves do not cross inside the sampled range")]
    NoCrossing,

    #[error("no root in the searched range: {0}")]
    NoRoot(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}
