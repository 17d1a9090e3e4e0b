use std::collections::VecDeque;

use super::{EstimatorKind, SourceEstimate};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, InfectedGraph, NodeId};
use crate::spread::{AlphaSchedule, InfectionSnapshot};

/// Approximate maximum-likelihood estimator over the leaves of the
/// infection subtree, for adaptive diffusion on graphs with cycles.
///
/// A leaf `v` at depth `δ` from the center scores
/// `(1/deg(v)) Π 1/(k(u) - 1) · P(h_T = δ)`, the product running over the
/// nodes strictly inside the subtree path from `v` to the center. `k(u)` is
/// the number of subtree neighbors of `u`, i.e. the token's pass options at
/// `u` plus the node it came from. `P(h_T = δ)` comes from the hop chain of
/// the schedule; with `d0 = inf` it is taken as 1. If the subtree has two
/// centers, the contributions of both are added. Interior nodes score 0.
pub fn estimate_leaf_general(
    snap: &InfectionSnapshot,
    net: &ContactNetwork,
    d0: AlphaSchedule,
    t: u32,
    seed: u64,
) -> Result<SourceEstimate> {
    let edges = snap
        .subtree_edges
        .as_ref()
        .ok_or_else(|| Error::Contract("leaf estimator needs the infection subtree edges".into()))?;
    if t % 2 == 1 {
        return Err(Error::Unsupported(format!("leaf estimator needs even T, got {t}")));
    }
    let g = InfectedGraph::from_edges(&snap.infected, edges)?;
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    let hop = match d0.d0() {
        Some(_) if t >= 2 => Some(d0.hop_distribution(t)?),
        _ => None,
    };
    let centers = g.jordan_center()?;
    let leaves = g.leaves();
    let mut score = vec![0.0; g.len()];
    for &c in &centers {
        for (i, m) in path_products(&g, c)?.into_iter().enumerate() {
            let v = g.nodes()[i];
            let Some((depth, log_p)) = m else { continue };
            if leaves.binary_search(&v).is_err() || centers.contains(&v) {
                continue;
            }
            let b = match &hop {
                Some(p) => p.get(depth as usize - 1).copied().unwrap_or(0.0),
                None => 1.0,
            };
            score[i] += (log_p - (net.degree(v)? as f64).ln()).exp() * b;
        }
    }
    let scores = g.nodes().iter().copied().zip(score).collect();
    SourceEstimate::select(EstimatorKind::LeafGeneral, scores, Some(1.0), seed)
}

/// Per node: `(depth, Σ -ln(k(u) - 1))` over the path nodes strictly
/// between `center` and the node. `None` for the center itself.
fn path_products(g: &InfectedGraph, center: NodeId) -> Result<Vec<Option<(u32, f64)>>> {
    let pos = |v: NodeId| g.nodes().binary_search(&v).expect("node of the graph");
    let mut out: Vec<Option<(u32, f64)>> = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    seen[pos(center)] = true;
    let mut queue = VecDeque::from([center]);
    while let Some(v) = queue.pop_front() {
        let msg = match out[pos(v)] {
            None => (1, 0.0),
            Some((depth, lp)) => (depth + 1, lp - ((g.degree(v)? - 1) as f64).ln()),
        };
        for w in g.neighbors(v)? {
            let iw = pos(w);
            if !seen[iw] {
                seen[iw] = true;
                out[iw] = Some(msg);
                queue.push_back(w);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::estimate_ml_irregular;
    use super::*;
    use crate::graph::{DegreeDistribution, FiniteGraph};
    use crate::rng::{substream, RngCoin};
    use crate::spread::Protocol;

    #[test]
    fn agrees_with_the_tree_estimator_on_leaves() {
        let dist = DegreeDistribution::parse("3=0.5,4=0.5").unwrap();
        for seed in 0..20 {
            let net = ContactNetwork::sampled_tree(dist.clone(), 40, seed).unwrap();
            for d0 in [AlphaSchedule::finite(3).unwrap(), AlphaSchedule::finite(4).unwrap()] {
                let p = Protocol::Adaptive { d0, cap: None };
                let (snap, _) = p.run(&net, NodeId(0), 6, &mut RngCoin(substream(seed, 1, 0))).unwrap();
                let tree = estimate_ml_irregular(&snap, &net, d0, 6, 0).unwrap();
                let leaf = estimate_leaf_general(&snap, &net, d0, 6, 0).unwrap();
                let g = snap.graph(&net).unwrap();
                for v in g.leaves() {
                    let a = tree.score(v).unwrap() * tree.scale.unwrap();
                    let b = leaf.score(v).unwrap();
                    assert!((a - b).abs() <= 1e-12 * a.max(b), "seed={seed} {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn interior_nodes_score_zero_and_edges_are_required() {
        let edges = (0..10u64).map(|i| (i, (i + 1) % 10)).chain([(0, 5), (2, 7)]);
        let net = ContactNetwork::finite(FiniteGraph::from_edges(edges));
        let p = Protocol::Adaptive { d0: AlphaSchedule::infinite(), cap: Some(3) };
        let (mut snap, _) = p.run(&net, NodeId(0), 4, &mut RngCoin(substream(1, 1, 0))).unwrap();
        let e = estimate_leaf_general(&snap, &net, AlphaSchedule::infinite(), 4, 0).unwrap();
        let g = snap.graph(&net).unwrap();
        for &(v, s) in &e.scores {
            if g.degree(v).unwrap() > 1 {
                assert_eq!(s, 0.0);
            }
        }
        snap.subtree_edges = None;
        assert!(estimate_leaf_general(&snap, &net, AlphaSchedule::infinite(), 4, 0).is_err());
    }
}
