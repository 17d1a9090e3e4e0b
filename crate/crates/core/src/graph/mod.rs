//! Contact networks and the tree utilities the adversary relies on.
//!
//! A [`ContactNetwork`] answers neighbor queries over four kinds of graph:
//! infinite regular trees and sampled irregular trees (both materialized
//! lazily), rings, and finite graphs read from edge lists.

mod degree;
mod finite;
mod lazy;
mod subgraph;

use std::fmt;
use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use degree::DegreeDistribution;
pub use finite::{load_edge_list, FiniteGraph, Prune};
pub use lazy::{LazyTree, TreeKind};
pub use subgraph::{jordan_center, InfectedGraph};

use crate::error::{Error, Result};

/// Node handle. Dense, assigned by the network that owns the node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected contact network over which messages spread.
#[derive(Debug, Clone)]
pub enum ContactNetwork {
    /// Infinite tree, regular or sampled, materialized on demand.
    Tree(LazyTree),
    /// Cycle on `n` nodes labelled `0..n`.
    Ring { n: u32 },
    /// Finite graph shared read-only between runs.
    Finite(Arc<FiniteGraph>),
}

impl ContactNetwork {
    pub fn regular_tree(degree: u32) -> Result<Self> {
        Ok(ContactNetwork::Tree(LazyTree::regular(degree, None)?))
    }

    /// The infinite line, i.e. the 2-regular tree.
    pub fn line() -> Self {
        ContactNetwork::Tree(LazyTree::regular(2, None).expect("degree 2 is valid"))
    }

    pub fn ring(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("ring needs at least 3 nodes, got {n}")));
        }
        Ok(ContactNetwork::Ring { n })
    }

    pub fn sampled_tree(dist: DegreeDistribution, max_depth: u32, seed: u64) -> Result<Self> {
        Ok(ContactNetwork::Tree(LazyTree::sampled(dist, Some(max_depth), seed)?))
    }

    pub fn finite(graph: FiniteGraph) -> Self {
        ContactNetwork::Finite(Arc::new(graph))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ContactNetwork::Tree(t) => match t.kind() {
                TreeKind::Regular { .. } => "regular_tree",
                TreeKind::Sampled { .. } => "sampled_tree",
            },
            ContactNetwork::Ring { .. } => "ring",
            ContactNetwork::Finite(_) => "finite_graph",
        }
    }

    /// The designated root; the source of runs on lazy trees.
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        match self {
            ContactNetwork::Tree(t) => t.contains(v),
            ContactNetwork::Ring { n } => v.0 < *n,
            ContactNetwork::Finite(g) => v.index() < g.node_count(),
        }
    }

    /// Full neighbor set of `v`. Lazy trees materialize `v`'s children on the
    /// first query.
    pub fn neighbors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        match self {
            ContactNetwork::Tree(t) => t.neighbors(v),
            ContactNetwork::Ring { n } => {
                if v.0 >= *n {
                    return Err(Error::UnknownNode(v));
                }
                Ok(vec![NodeId((v.0 + 1) % n), NodeId((v.0 + n - 1) % n)])
            }
            ContactNetwork::Finite(g) => g.neighbors(v).map(<[NodeId]>::to_vec),
        }
    }

    /// Degree of `v` without materializing anything.
    pub fn degree(&self, v: NodeId) -> Result<usize> {
        match self {
            ContactNetwork::Tree(t) => t.degree(v),
            ContactNetwork::Ring { n } => {
                if v.0 >= *n {
                    Err(Error::UnknownNode(v))
                } else {
                    Ok(2)
                }
            }
            ContactNetwork::Finite(g) => g.neighbors(v).map(<[NodeId]>::len),
        }
    }

    /// Shortest-path length between two nodes of the network.
    pub fn hop_distance(&self, u: NodeId, v: NodeId) -> Result<usize> {
        match self {
            ContactNetwork::Tree(t) => t.hop_distance(u, v),
            ContactNetwork::Ring { n } => {
                if u.0 >= *n {
                    return Err(Error::UnknownNode(u));
                }
                if v.0 >= *n {
                    return Err(Error::UnknownNode(v));
                }
                let d = u.0.abs_diff(v.0);
                Ok(d.min(n - d) as usize)
            }
            ContactNetwork::Finite(g) => g.hop_distance(u, v),
        }
    }

    /// Whether the network is known to contain no cycle.
    pub fn is_acyclic(&self) -> bool {
        match self {
            ContactNetwork::Tree(_) => true,
            ContactNetwork::Ring { .. } => false,
            ContactNetwork::Finite(g) => g.is_forest(),
        }
    }

    /// Number of nodes, for finite kinds.
    pub fn node_count(&self) -> Option<usize> {
        match self {
            ContactNetwork::Tree(_) => None,
            ContactNetwork::Ring { n } => Some(*n as usize),
            ContactNetwork::Finite(g) => Some(g.node_count()),
        }
    }

    /// External label of a node: the id from the edge-list file for finite
    /// graphs, the node id itself otherwise.
    pub fn label(&self, v: NodeId) -> u64 {
        match self {
            ContactNetwork::Finite(g) => g.label(v),
            _ => u64::from(v.0),
        }
    }

    pub fn resolve(&self, label: u64) -> Result<NodeId> {
        match self {
            ContactNetwork::Finite(g) => g.resolve(label),
            _ => {
                let v = u32::try_from(label)
                    .map(NodeId)
                    .map_err(|_| Error::UnknownLabel(label))?;
                if self.contains(v) {
                    Ok(v)
                } else {
                    Err(Error::UnknownLabel(label))
                }
            }
        }
    }

    /// Writes the network as an edge list. Lazy trees and rings get a JSON
    /// header comment so [`read_network`] can restore them exactly,
    /// including the lazy state needed to keep growing.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        match self {
            ContactNetwork::Tree(t) => t.write_edge_list(w),
            ContactNetwork::Ring { n } => {
                writeln!(w, "# {}", serde_json::json!({ "kind": "ring", "n": n }))?;
                for i in 0..*n {
                    writeln!(w, "{} {}", i, (i + 1) % n)?;
                }
                Ok(())
            }
            ContactNetwork::Finite(g) => g.write_edge_list(w),
        }
    }
}

#[derive(Debug, Deserialize)]
struct Header {
    kind: String,
    #[serde(default)]
    n: Option<u32>,
}

/// Reads a network written by [`ContactNetwork::write_edge_list`], or any
/// plain edge list (which becomes a finite graph pruned at `min_degree`).
pub fn read_network<R: BufRead>(mut reader: R, min_degree: usize, prune: Prune) -> Result<ContactNetwork> {
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if let Some(json) = first.trim_start().strip_prefix('#') {
        if let Ok(header) = serde_json::from_str::<Header>(json.trim()) {
            match header.kind.as_str() {
                "regular_tree" | "sampled_tree" => {
                    let tree = LazyTree::read_edge_list(json.trim(), reader)?;
                    return Ok(ContactNetwork::Tree(tree));
                }
                "ring" => {
                    let n = header
                        .n
                        .ok_or_else(|| Error::Parse { line: 1, msg: "ring header without n".into() })?;
                    return ContactNetwork::ring(n);
                }
                _ => {}
            }
        }
    }
    let rest = std::io::Cursor::new(first).chain(reader);
    Ok(ContactNetwork::finite(load_edge_list(rest, min_degree, prune)?))
}
