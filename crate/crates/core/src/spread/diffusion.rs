use std::collections::BTreeMap;

use super::infection::Infection;
use super::{InfectionSnapshot, ProtocolTag, Spreader};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId};
use crate::rng::{Chance, Coin};

/// Each step, every uninfected node adjacent to the infection flips one
/// coin with success probability `p`. A newly infected node's infector is
/// drawn uniformly from its infected neighbors.
#[derive(Debug, Clone)]
pub struct RandomDiffusion<'a> {
    net: &'a ContactNetwork,
    p: f64,
    t: u32,
    inf: Infection,
    /// Infected nodes that may still have uninfected neighbors.
    active: Vec<NodeId>,
}

impl<'a> RandomDiffusion<'a> {
    pub fn new(net: &'a ContactNetwork, source: NodeId, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config(format!("diffusion probability must be in (0, 1], got {p}")));
        }
        if !net.contains(source) {
            return Err(Error::UnknownNode(source));
        }
        Ok(RandomDiffusion { net, p, t: 0, inf: Infection::new(source), active: vec![source] })
    }
}

impl Spreader for RandomDiffusion<'_> {
    fn time(&self) -> u32 {
        self.t
    }

    fn step(&mut self, coin: &mut dyn Coin) -> Result<()> {
        let mut claims: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut still_active = Vec::with_capacity(self.active.len());
        for &v in &self.active {
            let open = self.inf.uninfected_neighbors(self.net, v)?;
            if !open.is_empty() {
                still_active.push(v);
            }
            for w in open {
                claims.entry(w).or_default().push(v);
            }
        }
        for (w, infectors) in claims {
            if coin.flip(Chance::Real(self.p)) {
                let by = match infectors.len() {
                    1 => infectors[0],
                    n => infectors[coin.pick(n)],
                };
                self.inf.infect(by, w);
                still_active.push(w);
            }
        }
        self.active = still_active;
        self.t += 1;
        Ok(())
    }

    fn snapshot(&self) -> InfectionSnapshot {
        InfectionSnapshot {
            protocol: ProtocolTag::Diffusion,
            time: self.t,
            infected: self.inf.sorted(),
            subtree_edges: Some(self.inf.edges().to_vec()),
            virtual_source: None,
            d0: None,
            exhausted: false,
        }
    }

    fn infected_count(&self) -> usize {
        self.inf.len()
    }
}
