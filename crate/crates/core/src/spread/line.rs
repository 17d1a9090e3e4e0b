use super::infection::Infection;
use super::{InfectionSnapshot, ProtocolTag, Spreader};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId, TreeKind};
use crate::rng::{Chance, Coin};

#[derive(Debug, Clone, Copy)]
struct Side {
    boundary: NodeId,
    next: NodeId,
    /// Hop distance of `boundary` from the source.
    dist: u32,
}

/// Line spreading: at time `t` each boundary node independently infects its
/// outer neighbor with probability `(dist + 1) / (t + 1)`.
#[derive(Debug, Clone)]
pub struct LineProtocol<'a> {
    net: &'a ContactNetwork,
    t: u32,
    inf: Infection,
    /// Right then left.
    sides: [Side; 2],
}

impl<'a> LineProtocol<'a> {
    /// `horizon` is the intended observation time; a ring must be long
    /// enough that the two ends never meet before it.
    pub fn new(net: &'a ContactNetwork, source: NodeId, horizon: u32) -> Result<Self> {
        match net {
            ContactNetwork::Ring { n } => {
                if u64::from(*n) < 2 * u64::from(horizon) + 2 {
                    return Err(Error::Config(format!(
                        "ring of {n} nodes is too small for T = {horizon}; need at least {}",
                        2 * u64::from(horizon) + 2
                    )));
                }
            }
            ContactNetwork::Tree(t) if matches!(t.kind(), TreeKind::Regular { degree: 2 }) => {}
            _ => return Err(Error::Config("line protocol needs a ring or the line".into())),
        }
        let nbrs = net.neighbors(source)?;
        let side = |next| Side { boundary: source, next, dist: 0 };
        Ok(LineProtocol { net, t: 0, inf: Infection::new(source), sides: [side(nbrs[0]), side(nbrs[1])] })
    }

    /// Extensions so far on the right and left.
    pub fn extensions(&self) -> (u32, u32) {
        (self.sides[0].dist, self.sides[1].dist)
    }
}

impl Spreader for LineProtocol<'_> {
    fn time(&self) -> u32 {
        self.t
    }

    fn step(&mut self, coin: &mut dyn Coin) -> Result<()> {
        let t = self.t + 1;
        for side in &mut self.sides {
            let chance = Chance::Ratio { num: u64::from(side.dist) + 1, den: u64::from(t) + 1 };
            if coin.flip(chance) {
                let w = side.next;
                self.inf.infect(side.boundary, w);
                let beyond = self
                    .net
                    .neighbors(w)?
                    .into_iter()
                    .find(|&x| x != side.boundary)
                    .ok_or(Error::NotATree)?;
                *side = Side { boundary: w, next: beyond, dist: side.dist + 1 };
            }
        }
        self.t = t;
        Ok(())
    }

    fn snapshot(&self) -> InfectionSnapshot {
        InfectionSnapshot {
            protocol: ProtocolTag::Line,
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
