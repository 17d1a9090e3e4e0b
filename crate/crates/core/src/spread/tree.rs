use std::collections::HashMap;

use super::infection::Infection;
use super::{InfectionSnapshot, ProtocolTag, Spreader};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId};
use crate::rng::Coin;

/// Per-node state: `s1` marks a future virtual source, `s2` is the height
/// the node will eventually reach in the infected subtree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeState {
    pub s1: bool,
    pub s2: u32,
}

/// Deterministic-size spreading on trees driven by the `(s1, s2)` states.
#[derive(Debug, Clone)]
pub struct TreeProtocol<'a> {
    net: &'a ContactNetwork,
    source: NodeId,
    t: u32,
    inf: Infection,
    state: HashMap<NodeId, TreeState>,
    /// Index into the infection order where the last step's infections begin.
    frontier: usize,
    exhausted: bool,
}

impl<'a> TreeProtocol<'a> {
    pub fn new(net: &'a ContactNetwork, source: NodeId) -> Result<Self> {
        if !net.is_acyclic() {
            return Err(Error::Config("tree protocol needs an acyclic network".into()));
        }
        if !net.contains(source) {
            return Err(Error::UnknownNode(source));
        }
        Ok(TreeProtocol {
            net,
            source,
            t: 0,
            inf: Infection::new(source),
            state: HashMap::from([(source, TreeState { s1: false, s2: 0 })]),
            frontier: 0,
            exhausted: false,
        })
    }

    pub fn state(&self, v: NodeId) -> Option<TreeState> {
        self.state.get(&v).copied()
    }

    /// Nodes infected in the most recent step.
    pub fn frontier(&self) -> &[NodeId] {
        &self.inf.order()[self.frontier..]
    }

    fn assign(&mut self, by: NodeId, w: NodeId, st: TreeState) {
        self.inf.infect(by, w);
        self.state.insert(w, st);
    }
}

impl Spreader for TreeProtocol<'_> {
    fn time(&self) -> u32 {
        self.t
    }

    fn step(&mut self, coin: &mut dyn Coin) -> Result<()> {
        self.t += 1;
        if self.exhausted {
            return Ok(());
        }
        let end = self.inf.len();
        if self.t == 1 {
            let nbrs = self.net.neighbors(self.source)?;
            if nbrs.is_empty() {
                self.exhausted = true;
                return Ok(());
            }
            let u = nbrs[coin.pick(nbrs.len())];
            self.assign(self.source, u, TreeState { s1: true, s2: 1 });
            self.frontier = end;
            return Ok(());
        }
        for i in self.frontier..end {
            let v = self.inf.order()[i];
            let TreeState { s1, s2 } = self.state[&v];
            if s2 == 0 {
                continue;
            }
            let open = self.inf.uninfected_neighbors(self.net, v)?;
            if s1 {
                if open.is_empty() {
                    self.exhausted = true;
                    continue;
                }
                let k = coin.pick(open.len());
                for (j, &w) in open.iter().enumerate() {
                    let st = if j == k {
                        TreeState { s1: true, s2: s2 + 1 }
                    } else {
                        TreeState { s1: false, s2: s2 - 1 }
                    };
                    self.assign(v, w, st);
                }
            } else {
                for w in open {
                    self.assign(v, w, TreeState { s1: false, s2: s2 - 1 });
                }
            }
        }
        self.frontier = end;
        Ok(())
    }

    fn snapshot(&self) -> InfectionSnapshot {
        InfectionSnapshot {
            protocol: ProtocolTag::Tree,
            time: self.t,
            infected: self.inf.sorted(),
            subtree_edges: Some(self.inf.edges().to_vec()),
            virtual_source: None,
            d0: None,
            exhausted: self.exhausted,
        }
    }

    fn infected_count(&self) -> usize {
        self.inf.len()
    }
}
