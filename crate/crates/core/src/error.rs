use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid task set: {0}")]
    InvalidTaskSet(String),

    #[error("brute-force sequencing refused: {jobs} jobs exceeds the cap of {cap}")]
    BruteForceCap { jobs: usize, cap: usize },

    #[error("dependency graph contains a cycle")]
    CyclicGraph,

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
