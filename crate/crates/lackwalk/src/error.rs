use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("dimension must be 1 or 2, got {0}")]
    InvalidDimension(u8),
    #[error("side must be at least 2, got {0}")]
    SideTooSmall(usize),
    #[error("vertex {vertex} out of range for lattice with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("direction {0} is not a coin direction on a {1}-dimensional lattice")]
    InvalidDirection(&'static str, u8),
    #[error("the self-loop has no neighbor; shift handles it in place")]
    LoopHasNoNeighbor,
    #[error("self-loop weight must be positive and finite, got {0}")]
    InvalidLoopWeight(f64),
    #[error("marked vertices contain a duplicate: {0}")]
    DuplicateMarkedVertex(usize),
    #[error("marked set is empty; search is undefined")]
    EmptyMarkedSet,
    #[error("cluster {k}x{l} does not fit a lattice of side {side}")]
    ClusterTooLarge { k: usize, l: usize, side: usize },
    #[error("run of length {m} exceeds lattice size {n}")]
    RunTooLong { m: usize, n: usize },
    #[error("cluster kind requires a {required}-dimensional lattice")]
    WrongClusterDimension { required: u8 },
    #[error("dense reference limited to dimension {max}, requested {requested}")]
    DenseTooLarge { requested: usize, max: usize },
    #[error("state length {state} does not match operator dimension {operator}")]
    DimensionMismatch { state: usize, operator: usize },
    #[error("trace must have at least 3 entries, got {0}")]
    TraceTooShort(usize),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("prominence must lie in [0, 1), got {0}")]
    InvalidProminence(f64),
    #[error("scaling fit needs at least 3 rows, got {0}")]
    TooFewRows(usize),
    #[error("fit requires strictly positive peak times")]
    NonPositivePeakTime,
}

pub type Result<T, E = WalkError> = std::result::Result<T, E>;
