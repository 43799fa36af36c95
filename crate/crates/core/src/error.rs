use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("adjacency c{l} is out of range for dimension {dim}")]
    AdjacencyOutOfRange { l: u32, dim: usize },

    #[error("digital images must contain at least one point")]
    EmptyImage,

    #[error("duplicate point {0}")]
    DuplicatePoint(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid explicit edge ({0}, {1})")]
    InvalidEdge(usize, usize),

    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(i64, i64),

    #[error("image mismatch: {0}")]
    ImageMismatch(String),

    #[error("map table is not total: {0}")]
    PartialMap(String),

    #[error("image is not connected: {0}")]
    Disconnected(String),

    #[error("map is not surjective: {0}")]
    NotSurjective(String),

    #[error("map is not continuous: {0}")]
    NotContinuous(String),

    #[error("empty fiber over base point {0}")]
    EmptyFiber(String),

    #[error("search budget exceeded: {0}")]
    Budget(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// Budget errors are reported separately from input errors (CLI exit code 3).
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}
