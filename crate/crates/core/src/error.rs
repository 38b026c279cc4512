use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("degree-sum violation on component {component}: residual {residual:e}")]
    DegreeSum { component: u32, residual: f64 },
    #[error("ordering mismatch: {0}")]
    OrderingMismatch(String),
    #[error("malformed dimensions: {0}")]
    Dimension(String),
    #[error("orientation mismatch: {0}")]
    Orientation(String),
    #[error("boundary id collision: {0}")]
    IdCollision(u32),
    #[error("unknown boundary id {0}")]
    UnknownBoundary(u32),
    #[error("overlapping glue pairs: {0}")]
    OverlappingPairs(String),
    #[error("radical of constrained subspace differs from diagonal copy (distance {0:e})")]
    Radical(f64),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("invalid circle domain: {0}")]
    Domain(String),
    #[error("not comparable: {0}")]
    NotComparable(String),
    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),
    #[error("not closed: {0}")]
    NotClosed(String),
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("invalid input: {0}")]
    Input(String),
}
