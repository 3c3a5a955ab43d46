use thiserror::Error;

use crate::graph::VertexId;

/// Errors raised by the graph engine.
///
/// Variants up to `Json` are input/domain errors. `Invariant` means the engine
/// itself broke a contract it is supposed to maintain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {0} is not a vertex of the graph")]
    UnknownVertex(VertexId),

    #[error("vertex {0} lies in the avoided set")]
    AvoidedVertex(VertexId),

    #[error("invalid graph family: {0}")]
    InvalidFamily(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("vertex {0} is not in the tree")]
    NotInTree(VertexId),

    #[error("vertices {0} and {1} are incomparable in the tree order")]
    NotAChain(VertexId, VertexId),

    #[error("tree is not a subgraph of the host: {0}")]
    NotSubgraph(String),

    #[error("graph has {size} vertices, brute force is limited to {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("graph is disconnected: vertex {unreachable} is unreachable from {root}")]
    Disconnected { root: VertexId, unreachable: VertexId },

    #[error("target {target} is not in the component of {rep}")]
    OutsideComponent { target: VertexId, rep: VertexId },

    #[error("component of {0} has no attachment vertex in the tree")]
    NoAttachment(VertexId),

    #[error("search budget of {budget} steps exhausted while looking for {target}")]
    BudgetExhausted { target: VertexId, budget: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nothing to witness: the build report is spanning")]
    NothingToWitness,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("engine invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
