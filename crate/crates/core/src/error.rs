use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("region is empty")]
    EmptyRegion,
    #[error("fiber dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("degenerate halfplane: normal must be finite and nonzero, offset finite")]
    DegenerateHalfPlane,
    #[error("bad scenario: {0}")]
    BadScenario(String),
    #[error("node index {index} out of range (node count {count})")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("grid too large for brute-force oracle: {nodes} nodes (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("empty fiber at node {node} (x = {location:?})")]
    EmptyFiber { node: usize, location: [f64; 2] },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
