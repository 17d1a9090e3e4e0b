//! Spreading protocols and the analytics of the virtual-source chain.
//!
//! Every protocol is a [`Spreader`]: a state machine advanced one timestep
//! at a time, drawing all randomness through a [`Coin`].

mod adaptive;
mod diffusion;
mod flood;
mod infection;
mod line;
mod schedule;
mod tree;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, InfectedGraph, NodeId};
use crate::rng::Coin;

pub use adaptive::AdaptiveDiffusion;
pub use diffusion::RandomDiffusion;
pub use flood::Flood;
pub use line::LineProtocol;
pub use schedule::{state_distribution_closed, state_distribution_recursive, AlphaSchedule};
pub use tree::TreeProtocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolTag {
    Flood,
    Diffusion,
    Line,
    Tree,
    Adaptive,
}

impl ProtocolTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolTag::Flood => "flood",
            ProtocolTag::Diffusion => "diffusion",
            ProtocolTag::Line => "line",
            ProtocolTag::Tree => "tree",
            ProtocolTag::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for ProtocolTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an adversary gets to see after `time` steps. The true source is
/// deliberately absent.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionSnapshot {
    pub protocol: ProtocolTag,
    pub time: u32,
    /// Sorted.
    pub infected: Vec<NodeId>,
    /// `(infector, infectee)` pairs spanning `infected`.
    pub subtree_edges: Option<Vec<(NodeId, NodeId)>>,
    pub virtual_source: Option<NodeId>,
    pub d0: Option<AlphaSchedule>,
    /// The run hit the edge of a finite network and could not follow the
    /// protocol exactly.
    pub exhausted: bool,
}

impl InfectionSnapshot {
    pub fn len(&self) -> usize {
        self.infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infected.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.infected.binary_search(&v).is_ok()
    }

    /// The infection subtree when recorded, otherwise the subgraph of the
    /// network induced by the infected nodes.
    pub fn graph(&self, net: &ContactNetwork) -> Result<InfectedGraph> {
        match &self.subtree_edges {
            Some(edges) => InfectedGraph::from_edges(&self.infected, edges),
            None => InfectedGraph::induced(net, &self.infected),
        }
    }

    /// JSON form, with nodes written as network labels.
    pub fn to_record(&self, net: &ContactNetwork) -> SnapshotRecord {
        let l = |v: NodeId| net.label(v);
        SnapshotRecord {
            protocol: self.protocol,
            t: self.time,
            infected: self.infected.iter().map(|&v| l(v)).collect(),
            subtree_edges: self
                .subtree_edges
                .as_ref()
                .map(|es| es.iter().map(|&(a, b)| [l(a), l(b)]).collect()),
            virtual_source: self.virtual_source.map(l),
            d0: self.d0,
            exhausted: self.exhausted,
        }
    }

    pub fn from_record(rec: &SnapshotRecord, net: &ContactNetwork) -> Result<Self> {
        let r = |x: u64| net.resolve(x);
        let mut infected = rec.infected.iter().map(|&x| r(x)).collect::<Result<Vec<_>>>()?;
        infected.sort_unstable();
        infected.dedup();
        if infected.is_empty() {
            return Err(Error::Contract("snapshot has no infected nodes".into()));
        }
        let subtree_edges = match &rec.subtree_edges {
            Some(es) => Some(
                es.iter()
                    .map(|&[a, b]| Ok((r(a)?, r(b)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        Ok(InfectionSnapshot {
            protocol: rec.protocol,
            time: rec.t,
            infected,
            subtree_edges,
            virtual_source: rec.virtual_source.map(r).transpose()?,
            d0: rec.d0,
            exhausted: rec.exhausted,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub protocol: ProtocolTag,
    #[serde(rename = "T")]
    pub t: u32,
    pub infected: Vec<u64>,
    pub subtree_edges: Option<Vec<[u64; 2]>>,
    pub virtual_source: Option<u64>,
    pub d0: Option<AlphaSchedule>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exhausted: bool,
}

/// One entry of a protocol trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum TraceEvent<N = NodeId> {
    /// The token moved from `from` to `to`, now `h` hops from the source.
    Pass { t: u32, from: N, to: N, h: u32 },
    /// The token holder kept the token.
    Keep { t: u32, at: N, h: u32 },
    Infect { t: u32, infector: N, infectee: N },
}

impl TraceEvent<NodeId> {
    pub fn map<M>(self, mut f: impl FnMut(NodeId) -> M) -> TraceEvent<M> {
        match self {
            TraceEvent::Pass { t, from, to, h } => TraceEvent::Pass { t, from: f(from), to: f(to), h },
            TraceEvent::Keep { t, at, h } => TraceEvent::Keep { t, at: f(at), h },
            TraceEvent::Infect { t, infector, infectee } => TraceEvent::Infect {
                t,
                infector: f(infector),
                infectee: f(infectee),
            },
        }
    }
}

/// A protocol run in progress.
pub trait Spreader {
    fn time(&self) -> u32;
    /// Advances by one timestep.
    fn step(&mut self, coin: &mut dyn Coin) -> Result<()>;
    fn snapshot(&self) -> InfectionSnapshot;
    fn infected_count(&self) -> usize;
    fn trace(&self) -> &[TraceEvent] {
        &[]
    }
}

/// Runs `spreader` until its clock reads `horizon`.
pub fn advance(spreader: &mut dyn Spreader, horizon: u32, coin: &mut dyn Coin) -> Result<()> {
    while spreader.time() < horizon {
        spreader.step(coin)?;
    }
    Ok(())
}

/// Protocol choice plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "lowercase")]
pub enum Protocol {
    Flood,
    Diffusion { p: f64 },
    Line,
    Tree,
    Adaptive { d0: AlphaSchedule, cap: Option<usize> },
}

impl Protocol {
    pub fn tag(&self) -> ProtocolTag {
        match self {
            Protocol::Flood => ProtocolTag::Flood,
            Protocol::Diffusion { .. } => ProtocolTag::Diffusion,
            Protocol::Line => ProtocolTag::Line,
            Protocol::Tree => ProtocolTag::Tree,
            Protocol::Adaptive { .. } => ProtocolTag::Adaptive,
        }
    }

    pub fn d0(&self) -> Option<AlphaSchedule> {
        match self {
            Protocol::Adaptive { d0, .. } => Some(*d0),
            _ => None,
        }
    }

    /// Starts a run from `source` that will be observed at `horizon`.
    pub fn start<'a>(
        &self,
        net: &'a ContactNetwork,
        source: NodeId,
        horizon: u32,
    ) -> Result<Box<dyn Spreader + 'a>> {
        Ok(match *self {
            Protocol::Flood => Box::new(Flood::new(net, source)?),
            Protocol::Diffusion { p } => Box::new(RandomDiffusion::new(net, source, p)?),
            Protocol::Line => Box::new(LineProtocol::new(net, source, horizon)?),
            Protocol::Tree => Box::new(TreeProtocol::new(net, source)?),
            Protocol::Adaptive { d0, cap } => Box::new(AdaptiveDiffusion::new(net, source, d0, cap)?),
        })
    }

    /// Starts, advances to `horizon`, and returns the final snapshot and
    /// trace.
    pub fn run(
        &self,
        net: &ContactNetwork,
        source: NodeId,
        horizon: u32,
        coin: &mut dyn Coin,
    ) -> Result<(InfectionSnapshot, Vec<TraceEvent>)> {
        let mut s = self.start(net, source, horizon)?;
        advance(s.as_mut(), horizon, coin)?;
        Ok((s.snapshot(), s.trace().to_vec()))
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Diffusion { p } => write!(f, "diffusion:{p}"),
            Protocol::Adaptive { d0, .. } => write!(f, "adaptive:{d0}"),
            other => f.write_str(other.tag().as_str()),
        }
    }
}

impl FromStr for Protocol {
    type Err = Error;

    /// `flood`, `diffusion:<p>`, `line`, `tree`, `adaptive[:<d0>]`. The
    /// adaptive cap is set separately.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let p = match (name, arg) {
            ("flood", None) => Protocol::Flood,
            ("line", None) => Protocol::Line,
            ("tree", None) => Protocol::Tree,
            ("diffusion", Some(a)) => {
                let p: f64 = a
                    .parse()
                    .map_err(|_| Error::Config(format!("bad diffusion probability `{a}`")))?;
                Protocol::Diffusion { p }
            }
            ("diffusion", None) => Protocol::Diffusion { p: 0.5 },
            ("adaptive", a) => Protocol::Adaptive {
                d0: a.map(str::parse).transpose()?.unwrap_or(AlphaSchedule::infinite()),
                cap: None,
            },
            _ => return Err(Error::Config(format!("unknown protocol `{s}`"))),
        };
        Ok(p)
    }
}

/// Runs flooding from `source` for `horizon` steps.
pub fn run_flood(net: &ContactNetwork, source: NodeId, horizon: u32) -> Result<InfectionSnapshot> {
    let mut s = Flood::new(net, source)?;
    // flooding never draws
    let mut coin = crate::rng::RngCoin(crate::rng::substream(0, 0, 0));
    advance(&mut s, horizon, &mut coin)?;
    Ok(s.snapshot())
}

/// Hop distances of every infected node from `root` along subtree edges.
pub(crate) fn subtree_depths(
    root: NodeId,
    edges: &[(NodeId, NodeId)],
) -> HashMap<NodeId, usize> {
    let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut depth = HashMap::from([(root, 0)]);
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = depth[&u];
        for &w in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if !depth.contains_key(&w) {
                depth.insert(w, du + 1);
                queue.push_back(w);
            }
        }
    }
    depth
}
