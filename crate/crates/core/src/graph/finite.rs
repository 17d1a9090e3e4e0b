use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use super::NodeId;
use crate::error::{Error, Result};

/// How low-degree nodes are removed when loading an edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prune {
    /// Drop nodes whose degree in the input is below the threshold, once.
    #[default]
    Single,
    /// Repeat until every remaining node meets the threshold (k-core).
    Iterated,
}

impl std::str::FromStr for Prune {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Prune::Single),
            "iterated" => Ok(Prune::Iterated),
            _ => Err(Error::Config(format!("unknown pruning mode `{s}`"))),
        }
    }
}

/// Undirected simple graph with dense ids and the original labels kept for
/// output.
#[derive(Debug, Clone)]
pub struct FiniteGraph {
    adj: Vec<Vec<NodeId>>,
    labels: Vec<u64>,
    index: HashMap<u64, NodeId>,
    edges: usize,
}

impl FiniteGraph {
    /// Builds a graph from labelled edges; self-loops and duplicates are
    /// dropped. Ids follow ascending label order.
    pub fn from_edges<I: IntoIterator<Item = (u64, u64)>>(edges: I) -> Self {
        let mut pairs: Vec<(u64, u64)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut labels: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        labels.sort_unstable();
        labels.dedup();
        Self::build(labels, &pairs)
    }

    fn build(labels: Vec<u64>, pairs: &[(u64, u64)]) -> Self {
        let index: HashMap<u64, NodeId> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, NodeId::from_index(i)))
            .collect();
        let mut adj = vec![Vec::new(); labels.len()];
        for &(a, b) in pairs {
            let (ia, ib) = (index[&a], index[&b]);
            adj[ia.index()].push(ib);
            adj[ib.index()].push(ia);
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        FiniteGraph {
            adj,
            labels,
            index,
            edges: pairs.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, v: NodeId) -> Result<&[NodeId]> {
        self.adj.get(v.index()).map(Vec::as_slice).ok_or(Error::UnknownNode(v))
    }

    pub fn label(&self, v: NodeId) -> u64 {
        self.labels[v.index()]
    }

    pub fn resolve(&self, label: u64) -> Result<NodeId> {
        self.index.get(&label).copied().ok_or(Error::UnknownLabel(label))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.adj.len()).map(NodeId::from_index)
    }

    pub fn hop_distance(&self, u: NodeId, v: NodeId) -> Result<usize> {
        self.neighbors(u)?;
        self.neighbors(v)?;
        let mut dist = vec![usize::MAX; self.adj.len()];
        dist[u.index()] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == v {
                return Ok(dist[x.index()]);
            }
            for &y in &self.adj[x.index()] {
                if dist[y.index()] == usize::MAX {
                    dist[y.index()] = dist[x.index()] + 1;
                    queue.push_back(y);
                }
            }
        }
        Err(Error::Unreachable(u, v))
    }

    fn components(&self) -> usize {
        let mut seen = vec![false; self.adj.len()];
        let mut count = 0;
        for s in 0..self.adj.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for y in &self.adj[x] {
                    if !seen[y.index()] {
                        seen[y.index()] = true;
                        stack.push(y.index());
                    }
                }
            }
        }
        count
    }

    pub fn is_forest(&self) -> bool {
        self.edges + self.components() == self.adj.len()
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, nb) in self.adj.iter().enumerate() {
            for &j in nb {
                if j.index() > i {
                    writeln!(w, "{} {}", self.labels[i], self.labels[j.index()])?;
                }
            }
        }
        Ok(())
    }
}

/// Reads whitespace-separated `u v` pairs, one edge per line, `#` comments
/// allowed, then removes nodes of degree `< min_degree`.
pub fn load_edge_list<R: BufRead>(reader: R, min_degree: usize, prune: Prune) -> Result<FiniteGraph> {
    let mut edges = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut it = body.split_whitespace();
        let mut next = || -> Result<u64> {
            let tok = it.next().ok_or_else(|| Error::Parse {
                line: n + 1,
                msg: format!("expected two node ids, got `{body}`"),
            })?;
            tok.parse().map_err(|_| Error::Parse {
                line: n + 1,
                msg: format!("`{tok}` is not a non-negative integer node id"),
            })
        };
        let (a, b) = (next()?, next()?);
        edges.push((a, b));
    }
    let graph = FiniteGraph::from_edges(edges);
    let graph = prune_low_degree(graph, min_degree, prune);
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph { min_degree });
    }
    Ok(graph)
}

fn prune_low_degree(graph: FiniteGraph, min_degree: usize, prune: Prune) -> FiniteGraph {
    let mut alive: Vec<bool> = graph.adj.iter().map(|nb| nb.len() >= min_degree).collect();
    if prune == Prune::Iterated {
        let mut degree: Vec<usize> = graph.adj.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..alive.len()).filter(|&i| !alive[i]).collect();
        while let Some(x) = queue.pop() {
            for y in &graph.adj[x] {
                let y = y.index();
                if alive[y] {
                    degree[y] -= 1;
                    if degree[y] < min_degree {
                        alive[y] = false;
                        queue.push(y);
                    }
                }
            }
        }
    }
    if alive.iter().all(|&a| a) {
        return graph;
    }
    let labels: Vec<u64> = (0..alive.len()).filter(|&i| alive[i]).map(|i| graph.labels[i]).collect();
    let mut pairs = Vec::new();
    for (i, nb) in graph.adj.iter().enumerate() {
        for &j in nb {
            if j.index() > i && alive[i] && alive[j.index()] {
                pairs.push((graph.labels[i], graph.labels[j.index()]));
            }
        }
    }
    FiniteGraph::build(labels, &pairs)
}
