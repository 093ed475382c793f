use thiserror::Error;

/// Errors raised anywhere in the registration pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: face index {index} out of range for {vertex_count} vertices")]
    FaceIndex {
        line: usize,
        index: i64,
        vertex_count: usize,
    },

    #[error("face {face} references vertex {vertex} more than once")]
    DegenerateFace { face: usize, vertex: usize },

    #[error("face {face} index {index} out of range for {vertex_count} vertices")]
    InvalidFace {
        face: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("vertex {0} has no neighbors")]
    IsolatedVertex(usize),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("hierarchy level {level} has {vertices} vertices, too few to coarsen further")]
    HierarchyCollapsed { level: usize, vertices: usize },

    #[error("degenerate 6D rotation parameters: {0}")]
    Singular(String),

    #[error("non-finite loss at iteration {0}")]
    Diverged(usize),

    #[error("cached forward pass does not belong to the current network parameters")]
    StaleCache,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
