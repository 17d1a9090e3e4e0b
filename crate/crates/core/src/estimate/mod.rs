//! Source estimators: the adversary's side.
//!
//! Every estimator takes an [`InfectionSnapshot`] and the contact network
//! and returns a [`SourceEstimate`]. Ties among maximal scores are broken by
//! a uniform draw from a seeded stream.

mod adaptive;
mod general;
mod jordan;
mod line;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId};
use crate::rng::{domain, substream, Coin, RngCoin};
use crate::spread::{AlphaSchedule, InfectionSnapshot};

pub use adaptive::{estimate_ml_adaptive_regular, estimate_ml_irregular, leaf_likelihood};
pub use general::estimate_leaf_general;
pub use jordan::estimate_jordan;
pub use line::{estimate_ml_line, ring_posterior, DEFAULT_TAIL_TOLERANCE};
pub use tree::estimate_ml_tree_protocol;

/// Relative tolerance under which two scores count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Jordan,
    MlLine,
    MlTree,
    MlAdaptive,
    MlIrregular,
    LeafGeneral,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Jordan => "jordan",
            EstimatorKind::MlLine => "ml-line",
            EstimatorKind::MlTree => "ml-tree",
            EstimatorKind::MlAdaptive => "ml-adaptive",
            EstimatorKind::MlIrregular => "ml-irregular",
            EstimatorKind::LeafGeneral => "leaf-general",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "jordan" => EstimatorKind::Jordan,
            "ml-line" => EstimatorKind::MlLine,
            "ml-tree" => EstimatorKind::MlTree,
            "ml-adaptive" => EstimatorKind::MlAdaptive,
            "ml-irregular" => EstimatorKind::MlIrregular,
            "leaf-general" => EstimatorKind::LeafGeneral,
            other => return Err(Error::Config(format!("unknown estimator `{other}`"))),
        })
    }
}

/// Outcome of a source estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceEstimate {
    pub estimator: EstimatorKind,
    pub chosen: NodeId,
    /// One entry per infected node, sorted by node.
    pub scores: Vec<(NodeId, f64)>,
    /// Nodes with a positive score.
    pub feasible_count: usize,
    pub tie_broken: bool,
    /// Factor turning scores into absolute likelihoods, when known.
    pub scale: Option<f64>,
}

impl SourceEstimate {
    /// Picks the argmax of `scores`, breaking ties by a draw from `seed`.
    pub fn select(
        estimator: EstimatorKind,
        mut scores: Vec<(NodeId, f64)>,
        scale: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        scores.sort_unstable_by_key(|&(v, _)| v);
        let top = scores.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::Infeasible("no candidate has a finite score".into()));
        }
        let ties: Vec<NodeId> = scores
            .iter()
            .filter(|&&(_, s)| is_tied(s, top))
            .map(|&(v, _)| v)
            .collect();
        let chosen = match ties.len() {
            1 => ties[0],
            n => ties[RngCoin(substream(seed, domain::ESTIMATOR, 0)).pick(n)],
        };
        Ok(SourceEstimate {
            estimator,
            chosen,
            feasible_count: scores.iter().filter(|&&(_, s)| s > 0.0).count(),
            tie_broken: ties.len() > 1,
            scores,
            scale,
        })
    }

    pub fn score(&self, v: NodeId) -> Option<f64> {
        self.scores.binary_search_by_key(&v, |&(u, _)| u).ok().map(|i| self.scores[i].1)
    }

    /// All nodes attaining the maximal score.
    pub fn argmax(&self) -> Vec<NodeId> {
        let top = self.scores.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
        self.scores.iter().filter(|&&(_, s)| is_tied(s, top)).map(|&(v, _)| v).collect()
    }

    pub fn to_record(&self, net: &ContactNetwork) -> EstimateRecord {
        EstimateRecord {
            estimator: self.estimator,
            chosen: net.label(self.chosen),
            scores: self.scores.iter().map(|&(v, s)| (net.label(v), s)).collect(),
            feasible_count: self.feasible_count,
            tie_broken: self.tie_broken,
            scale: self.scale,
        }
    }
}

fn is_tied(s: f64, top: f64) -> bool {
    s == top || (top - s).abs() <= TIE_TOLERANCE * top.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub estimator: EstimatorKind,
    pub chosen: u64,
    pub scores: BTreeMap<u64, f64>,
    pub feasible_count: usize,
    pub tie_broken: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

/// Estimator choice with the parameters it needs beyond the snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimator {
    pub kind: EstimatorKind,
    /// Schedule assumed by the adversary; defaults to the snapshot's.
    pub d0: Option<AlphaSchedule>,
    /// Observation time assumed by the adversary; defaults to the
    /// snapshot's.
    pub assumed_t: Option<u32>,
}

impl Estimator {
    pub fn new(kind: EstimatorKind) -> Self {
        Estimator { kind, d0: None, assumed_t: None }
    }

    /// Default estimator for a protocol's snapshots.
    pub fn for_protocol(tag: crate::spread::ProtocolTag, net: &ContactNetwork) -> Self {
        use crate::spread::ProtocolTag as P;
        let kind = match tag {
            P::Flood | P::Diffusion => EstimatorKind::Jordan,
            P::Line => EstimatorKind::MlLine,
            P::Tree => EstimatorKind::MlTree,
            P::Adaptive => match net {
                ContactNetwork::Finite(_) => EstimatorKind::LeafGeneral,
                ContactNetwork::Tree(t) if matches!(t.kind(), crate::graph::TreeKind::Sampled { .. }) => {
                    EstimatorKind::MlIrregular
                }
                _ => EstimatorKind::MlAdaptive,
            },
        };
        Estimator::new(kind)
    }

    pub fn estimate(&self, snap: &InfectionSnapshot, net: &ContactNetwork, seed: u64) -> Result<SourceEstimate> {
        let t = self.assumed_t.unwrap_or(snap.time);
        let d0 = || {
            self.d0
                .or(snap.d0)
                .ok_or_else(|| Error::Config(format!("{} needs d0", self.kind)))
        };
        match self.kind {
            EstimatorKind::Jordan => estimate_jordan(snap, net, seed),
            EstimatorKind::MlLine => estimate_ml_line(snap, net, t, seed),
            EstimatorKind::MlTree => estimate_ml_tree_protocol(snap, net, seed),
            EstimatorKind::MlAdaptive => estimate_ml_adaptive_regular(snap, net, seed),
            EstimatorKind::MlIrregular => estimate_ml_irregular(snap, net, d0()?, t, seed),
            EstimatorKind::LeafGeneral => estimate_leaf_general(snap, net, d0()?, t, seed),
        }
    }
}
