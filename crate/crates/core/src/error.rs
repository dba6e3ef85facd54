use thiserror::Error;

/// Errors raised by field arithmetic, scheme construction and analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u128),
    #[error("modulus {0} is too small, need q > 2")]
    ModulusTooSmall(u128),
    #[error("modulus {q} exceeds the supported maximum {max}")]
    ModulusTooLarge { q: u128, max: u128 },
    #[error("entry {value} is not reduced modulo {q}")]
    EntryNotReduced { value: u128, q: u128 },
    #[error("matrix data has {len} entries, expected {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("duplicate column index {0}")]
    DuplicateIndex(usize),
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),
    #[error("generator {0} cannot build a Vandermonde matrix")]
    InvalidGenerator(u128),
    #[error("seed must be nonzero")]
    ZeroSeed,
    #[error("secret matrix is not symmetric")]
    AsymmetricSecret,
    #[error("compromised rows are inconsistent with the public matrix")]
    InconsistentSystem,
    #[error("a node cannot agree a key with itself (node {0})")]
    SameNode(usize),
    #[error("node {0} has no provisioned key material")]
    Unprovisioned(usize),
    #[error("key material mismatch: {0}")]
    MaterialMismatch(String),
    #[error("no connected topology after {0} draws")]
    NoConnectedTopology(usize),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
