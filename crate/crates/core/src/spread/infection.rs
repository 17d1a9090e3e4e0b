use std::collections::HashMap;

use crate::error::Result;
use crate::graph::{ContactNetwork, NodeId};

/// Infected set grown as a tree of `(infector, infectee)` edges.
#[derive(Debug, Clone)]
pub(crate) struct Infection {
    pos: HashMap<NodeId, usize>,
    order: Vec<NodeId>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Infection {
    pub fn new(source: NodeId) -> Self {
        Infection {
            pos: HashMap::from([(source, 0)]),
            order: vec![source],
            parent: vec![None],
            children: vec![Vec::new()],
            edges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.pos.contains_key(&v)
    }

    /// Nodes in infection order.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn infect(&mut self, infector: NodeId, infectee: NodeId) {
        debug_assert!(self.contains(infector) && !self.contains(infectee));
        let i = self.pos[&infector];
        self.children[i].push(infectee);
        self.pos.insert(infectee, self.order.len());
        self.order.push(infectee);
        self.parent.push(Some(infector));
        self.children.push(Vec::new());
        self.edges.push((infector, infectee));
    }

    /// Neighbors of `v` along infection edges, parent first.
    pub fn subtree_neighbors(&self, v: NodeId) -> Vec<NodeId> {
        let i = self.pos[&v];
        self.parent[i].into_iter().chain(self.children[i].iter().copied()).collect()
    }

    pub fn uninfected_neighbors(&self, net: &ContactNetwork, v: NodeId) -> Result<Vec<NodeId>> {
        let mut n = net.neighbors(v)?;
        n.retain(|w| !self.contains(*w));
        Ok(n)
    }

    pub fn sorted(&self) -> Vec<NodeId> {
        let mut v = self.order.clone();
        v.sort_unstable();
        v
    }
}
