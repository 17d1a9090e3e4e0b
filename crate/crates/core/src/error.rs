use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("no node labelled {0} in this network")]
    UnknownLabel(u64),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph is empty after pruning nodes of degree < {min_degree}")]
    EmptyGraph { min_degree: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("node {node} lies beyond the materialization depth {max_depth}")]
    DepthExceeded { node: NodeId, max_depth: u32 },

    #[error("subgraph is not connected")]
    Disconnected,

    #[error("subgraph is not a tree")]
    NotATree,

    #[error("nodes {0} and {1} are not connected")]
    Unreachable(NodeId, NodeId),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("infeasible snapshot: {0}")]
    Infeasible(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by the caller asking for something the estimator or
    /// protocol does not accept, as opposed to failures while running.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Contract(_) | Error::Unsupported(_) | Error::Infeasible(_)
        )
    }
}
