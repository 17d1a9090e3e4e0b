use super::infection::Infection;
use super::{InfectionSnapshot, ProtocolTag, Spreader};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId};
use crate::rng::Coin;

/// Every infected node infects all of its uninfected neighbors each step.
#[derive(Debug, Clone)]
pub struct Flood<'a> {
    net: &'a ContactNetwork,
    t: u32,
    inf: Infection,
    frontier: usize,
}

impl<'a> Flood<'a> {
    pub fn new(net: &'a ContactNetwork, source: NodeId) -> Result<Self> {
        if !net.contains(source) {
            return Err(Error::UnknownNode(source));
        }
        Ok(Flood { net, t: 0, inf: Infection::new(source), frontier: 0 })
    }
}

impl Spreader for Flood<'_> {
    fn time(&self) -> u32 {
        self.t
    }

    fn step(&mut self, _coin: &mut dyn Coin) -> Result<()> {
        let end = self.inf.len();
        for i in self.frontier..end {
            let v = self.inf.order()[i];
            for w in self.net.neighbors(v)? {
                if !self.inf.contains(w) {
                    self.inf.infect(v, w);
                }
            }
        }
        self.frontier = end;
        self.t += 1;
        Ok(())
    }

    fn snapshot(&self) -> InfectionSnapshot {
        InfectionSnapshot {
            protocol: ProtocolTag::Flood,
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
