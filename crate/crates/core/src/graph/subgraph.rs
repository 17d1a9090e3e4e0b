use std::collections::{HashMap, VecDeque};

use super::{ContactNetwork, NodeId};
use crate::error::{Error, Result};

/// A small graph over a node set, typically the infected subtree seen by
/// the adversary. Nodes are kept sorted; internal positions index `adj`.
#[derive(Debug, Clone)]
pub struct InfectedGraph {
    nodes: Vec<NodeId>,
    pos: HashMap<NodeId, usize>,
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl InfectedGraph {
    pub fn from_edges(nodes: &[NodeId], edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let pos: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); nodes.len()];
        let mut count = 0;
        for &(a, b) in edges {
            let ia = *pos.get(&a).ok_or(Error::UnknownNode(a))?;
            let ib = *pos.get(&b).ok_or(Error::UnknownNode(b))?;
            if ia == ib || adj[ia].contains(&ib) {
                continue;
            }
            adj[ia].push(ib);
            adj[ib].push(ia);
            count += 1;
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(InfectedGraph {
            nodes,
            pos,
            adj,
            edges: count,
        })
    }

    /// Subgraph of `net` induced by `nodes`.
    pub fn induced(net: &ContactNetwork, nodes: &[NodeId]) -> Result<Self> {
        let set: std::collections::HashSet<NodeId> = nodes.iter().copied().collect();
        let mut edges = Vec::new();
        for &v in nodes {
            for w in net.neighbors(v)? {
                if v < w && set.contains(&w) {
                    edges.push((v, w));
                }
            }
        }
        Self::from_edges(nodes, &edges)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.pos.contains_key(&v)
    }

    fn position(&self, v: NodeId) -> Result<usize> {
        self.pos.get(&v).copied().ok_or(Error::UnknownNode(v))
    }

    pub fn neighbors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        let i = self.position(v)?;
        Ok(self.adj[i].iter().map(|&j| self.nodes[j]).collect())
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        Ok(self.adj[self.position(v)?].len())
    }

    /// Nodes of degree at most one. A single-node graph is its own leaf.
    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.len())
            .filter(|&i| self.adj[i].len() <= 1)
            .map(|i| self.nodes[i])
            .collect()
    }

    fn bfs(&self, from: usize) -> (Vec<usize>, Vec<usize>) {
        let mut dist = vec![usize::MAX; self.len()];
        let mut parent = vec![usize::MAX; self.len()];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        (dist, parent)
    }

    /// Hop distances from `v` to every node, in node order; `usize::MAX`
    /// for unreachable nodes.
    pub fn distances_from(&self, v: NodeId) -> Result<Vec<usize>> {
        Ok(self.bfs(self.position(v)?).0)
    }

    pub fn hop_distance(&self, u: NodeId, v: NodeId) -> Result<usize> {
        let d = self.bfs(self.position(u)?).0[self.position(v)?];
        if d == usize::MAX {
            Err(Error::Unreachable(u, v))
        } else {
            Ok(d)
        }
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.bfs(0).0.iter().all(|&d| d != usize::MAX)
    }

    pub fn is_tree(&self) -> bool {
        !self.is_empty() && self.edges + 1 == self.len() && self.is_connected()
    }

    fn require_tree(&self) -> Result<()> {
        if self.is_empty() || !self.is_connected() {
            Err(Error::Disconnected)
        } else if self.edges + 1 != self.len() {
            Err(Error::NotATree)
        } else {
            Ok(())
        }
    }

    /// Unique path from `u` to `v` (inclusive) in a tree.
    pub fn path(&self, u: NodeId, v: NodeId) -> Result<Vec<NodeId>> {
        let (iu, iv) = (self.position(u)?, self.position(v)?);
        let (dist, parent) = self.bfs(iv);
        if dist[iu] == usize::MAX {
            return Err(Error::Unreachable(u, v));
        }
        let mut out = vec![u];
        let mut x = iu;
        while x != iv {
            x = parent[x];
            out.push(self.nodes[x]);
        }
        Ok(out)
    }

    /// Eccentricity of every node, in node order. Linear time on trees
    /// (distance to the farther diameter endpoint), one BFS per node
    /// otherwise.
    pub fn eccentricities(&self) -> Result<Vec<usize>> {
        if self.is_empty() || !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.edges + 1 == self.len() {
            let d0 = self.bfs(0).0;
            let a = argmax(&d0);
            let da = self.bfs(a).0;
            let b = argmax(&da);
            let db = self.bfs(b).0;
            Ok(da.iter().zip(&db).map(|(&x, &y)| x.max(y)).collect())
        } else {
            Ok((0..self.len())
                .map(|i| self.bfs(i).0.into_iter().max().unwrap_or(0))
                .collect())
        }
    }

    /// All nodes of minimum eccentricity: one node, or two adjacent nodes.
    pub fn jordan_center(&self) -> Result<Vec<NodeId>> {
        self.require_tree()?;
        let ecc = self.eccentricities()?;
        let best = *ecc.iter().min().expect("non-empty");
        Ok((0..self.len()).filter(|&i| ecc[i] == best).map(|i| self.nodes[i]).collect())
    }
}

fn argmax(d: &[usize]) -> usize {
    let mut best = 0;
    for (i, &x) in d.iter().enumerate() {
        if x > d[best] {
            best = i;
        }
    }
    best
}

/// Jordan center(s) of the tree given by `nodes` and `edges`.
pub fn jordan_center(nodes: &[NodeId], edges: &[(NodeId, NodeId)]) -> Result<Vec<NodeId>> {
    InfectedGraph::from_edges(nodes, edges)?.jordan_center()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&x| NodeId(x)).collect()
    }

    fn path_edges(n: u32) -> Vec<(NodeId, NodeId)> {
        (0..n - 1).map(|i| (NodeId(i), NodeId(i + 1))).collect()
    }

    #[test]
    fn odd_path_center() {
        let c = jordan_center(&ids(&[0, 1, 2, 3, 4]), &path_edges(5)).unwrap();
        assert_eq!(c, ids(&[2]));
    }

    #[test]
    fn even_path_two_centers() {
        let c = jordan_center(&ids(&[0, 1, 2, 3]), &path_edges(4)).unwrap();
        assert_eq!(c, ids(&[1, 2]));
    }

    #[test]
    fn balanced_ternary_tree_center_is_root() {
        // root 0, children 1..=3, each with two children
        let mut edges = vec![];
        let mut next = 4;
        for c in 1..=3 {
            edges.push((NodeId(0), NodeId(c)));
            for _ in 0..2 {
                edges.push((NodeId(c), NodeId(next)));
                next += 1;
            }
        }
        let nodes: Vec<NodeId> = (0..next).map(NodeId).collect();
        assert_eq!(jordan_center(&nodes, &edges).unwrap(), ids(&[0]));
    }

    #[test]
    fn disconnected_rejected() {
        let err = jordan_center(&ids(&[0, 1, 2]), &[(NodeId(0), NodeId(1))]).unwrap_err();
        assert!(matches!(err, Error::Disconnected));
    }

    #[test]
    fn cycle_rejected() {
        let edges = vec![(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2)), (NodeId(2), NodeId(0))];
        assert!(matches!(jordan_center(&ids(&[0, 1, 2]), &edges), Err(Error::NotATree)));
    }

    #[test]
    fn hop_distance_basics() {
        let g = InfectedGraph::from_edges(&ids(&[0, 1, 2]), &path_edges(3)).unwrap();
        assert_eq!(g.hop_distance(NodeId(1), NodeId(1)).unwrap(), 0);
        assert_eq!(g.hop_distance(NodeId(0), NodeId(1)).unwrap(), 1);
        assert_eq!(g.path(NodeId(0), NodeId(2)).unwrap(), ids(&[0, 1, 2]));
        let h = InfectedGraph::from_edges(&ids(&[0, 1, 2]), &path_edges(2)).unwrap();
        assert!(matches!(h.hop_distance(NodeId(0), NodeId(2)), Err(Error::Unreachable(..))));
    }

    /// Random labelled tree from a parent sequence.
    fn random_tree() -> impl Strategy<Value = (Vec<NodeId>, Vec<(NodeId, NodeId)>)> {
        (1usize..50).prop_flat_map(|n| {
            proptest::collection::vec(any::<prop::sample::Index>(), n - 1).prop_map(move |parents| {
                let nodes: Vec<NodeId> = (0..n as u32).map(|i| NodeId(i * 7 + 3)).collect();
                let edges = parents
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (nodes[p.index(i + 1)], nodes[i + 1]))
                    .collect();
                (nodes, edges)
            })
        })
    }

    proptest! {
        #[test]
        fn center_matches_brute_force((nodes, edges) in random_tree()) {
            let g = InfectedGraph::from_edges(&nodes, &edges).unwrap();
            let brute: Vec<usize> = nodes
                .iter()
                .map(|&u| nodes.iter().map(|&v| g.hop_distance(u, v).unwrap()).max().unwrap())
                .collect();
            let best = *brute.iter().min().unwrap();
            let expected: Vec<NodeId> = (0..nodes.len()).filter(|&i| brute[i] == best).map(|i| g.nodes()[i]).collect();
            prop_assert_eq!(g.eccentricities().unwrap(), brute);
            let centers = g.jordan_center().unwrap();
            prop_assert!(centers.len() == 1 || centers.len() == 2);
            if centers.len() == 2 {
                prop_assert_eq!(g.hop_distance(centers[0], centers[1]).unwrap(), 1);
            }
            prop_assert_eq!(centers, expected);
        }

        #[test]
        fn distance_is_a_metric((nodes, edges) in random_tree(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>(), c in any::<prop::sample::Index>()) {
            let g = InfectedGraph::from_edges(&nodes, &edges).unwrap();
            let (u, v, w) = (nodes[a.index(nodes.len())], nodes[b.index(nodes.len())], nodes[c.index(nodes.len())]);
            let d = |x, y| g.hop_distance(x, y).unwrap();
            prop_assert_eq!(d(u, v), d(v, u));
            prop_assert!(d(u, w) <= d(u, v) + d(v, w));
        }
    }
}
