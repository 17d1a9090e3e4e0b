use super::{EstimatorKind, SourceEstimate};
use crate::error::Result;
use crate::graph::ContactNetwork;
use crate::spread::InfectionSnapshot;

/// Maximum-likelihood estimator for tree-protocol snapshots on regular
/// trees: every leaf of the infected subtree is equally likely and no
/// interior node can be the source.
pub fn estimate_ml_tree_protocol(snap: &InfectionSnapshot, net: &ContactNetwork, seed: u64) -> Result<SourceEstimate> {
    let g = snap.graph(net)?;
    let leaves = g.leaves();
    let w = 1.0 / leaves.len() as f64;
    let scores = g
        .nodes()
        .iter()
        .map(|&v| (v, if leaves.binary_search(&v).is_ok() { w } else { 0.0 }))
        .collect();
    SourceEstimate::select(EstimatorKind::MlTree, scores, None, seed)
}
