use std::collections::VecDeque;

use super::{EstimatorKind, SourceEstimate};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, InfectedGraph, NodeId};
use crate::spread::{AlphaSchedule, InfectionSnapshot};

/// Maximum-likelihood estimator for adaptive diffusion on a regular tree
/// with matched `d0`: every node except the Jordan center(s) is equally
/// likely. When excluding the centers would leave nothing (at `T <= 1`),
/// all infected nodes are kept.
pub fn estimate_ml_adaptive_regular(snap: &InfectionSnapshot, net: &ContactNetwork, seed: u64) -> Result<SourceEstimate> {
    let g = snap.graph(net)?;
    let centers = g.jordan_center()?;
    let mut candidates: Vec<NodeId> = g.nodes().iter().copied().filter(|v| !centers.contains(v)).collect();
    if candidates.is_empty() {
        candidates = g.nodes().to_vec();
    }
    let w = 1.0 / candidates.len() as f64;
    let scores = g
        .nodes()
        .iter()
        .map(|&v| (v, if candidates.binary_search(&v).is_ok() { w } else { 0.0 }))
        .collect();
    SourceEstimate::select(EstimatorKind::MlAdaptive, scores, None, seed)
}

/// Likelihood of a snapshot at even `t` given any non-center source, on a
/// `d0`-regular tree: `1/(d0 (d0-1)^(t/2-1)) * Π_{s<t, s even} (1 - alpha(s, s/2))`.
pub fn leaf_likelihood(sched: AlphaSchedule, t: u32) -> Result<f64> {
    let d0 = sched
        .d0()
        .ok_or_else(|| Error::Unsupported("leaf likelihood is degenerate for d0 = inf".into()))?;
    if t < 2 || t % 2 == 1 {
        return Err(Error::Unsupported(format!("leaf likelihood needs even t >= 2, got {t}")));
    }
    let mut p = 1.0 / f64::from(d0) / f64::from(d0 - 1).powi(t as i32 / 2 - 1);
    for s in (2..t).step_by(2) {
        p *= 1.0 - sched.alpha(s, s / 2)?;
    }
    Ok(p)
}

/// Per node: `(depth from the center, ln A)` where `A` is the probability
/// of the token's moves along the path under the network degrees, as
/// produced by the degree-message pass. `None` for the center.
pub(super) fn degree_messages(
    g: &InfectedGraph,
    center: NodeId,
    degree: impl Fn(NodeId) -> Result<usize>,
) -> Result<Vec<Option<(u32, f64)>>> {
    let pos = |v: NodeId| g.nodes().binary_search(&v).expect("node of the graph");
    let mut out: Vec<Option<(u32, f64)>> = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    seen[pos(center)] = true;
    let mut queue = VecDeque::from([center]);
    while let Some(v) = queue.pop_front() {
        let here = out[pos(v)];
        for w in g.neighbors(v)? {
            let iw = pos(w);
            if seen[iw] {
                continue;
            }
            seen[iw] = true;
            let dw = degree(w)? as f64;
            let msg = match here {
                None => (1, -dw.ln()),
                Some((depth, log_a)) => {
                    let dv = degree(v)?;
                    if dv < 2 {
                        return Err(Error::Contract(format!("interior node {v} has degree {dv} < 2")));
                    }
                    let dv = dv as f64;
                    (depth + 1, log_a + (dv / (dw * (dv - 1.0))).ln())
                }
            };
            out[iw] = Some(msg);
            queue.push_back(w);
        }
    }
    Ok(out)
}

/// Maximum-likelihood estimator for adaptive diffusion with schedule `d0`
/// on an irregular tree, at even `t`. Scores are
/// `(d0/deg(v)) Π_{v' strictly inside path(center, v)} (d0-1)/(deg(v')-1)`,
/// with the center scored 0. With `d0 = inf` the token always ends `t/2`
/// hops from the source, so scores are the path probabilities of nodes at
/// that depth and 0 elsewhere.
///
/// `scale` converts scores to absolute likelihoods.
pub fn estimate_ml_irregular(
    snap: &InfectionSnapshot,
    net: &ContactNetwork,
    d0: AlphaSchedule,
    t: u32,
    seed: u64,
) -> Result<SourceEstimate> {
    if t % 2 == 1 {
        return Err(Error::Unsupported(format!("irregular-tree estimator needs even T, got {t}")));
    }
    let g = snap.graph(net)?;
    let center = match g.jordan_center()?.as_slice() {
        [c] => *c,
        _ => return Err(Error::Contract("snapshot has two Jordan centers at even T".into())),
    };
    let msgs = degree_messages(&g, center, |v| net.degree(v))?;
    let scores: Vec<(NodeId, f64)> = g
        .nodes()
        .iter()
        .zip(&msgs)
        .map(|(&v, m)| {
            let s = match (m, d0.d0()) {
                (None, _) => 0.0,
                (Some((depth, log_a)), Some(d)) => {
                    (log_a + f64::from(d).ln() + f64::from(depth - 1) * f64::from(d - 1).ln()).exp()
                }
                (Some((depth, log_a)), None) => {
                    if *depth == t / 2 {
                        log_a.exp()
                    } else {
                        0.0
                    }
                }
            };
            (v, s)
        })
        .collect();
    let scale = match d0.d0() {
        Some(_) if t >= 2 => Some(leaf_likelihood(d0, t)?),
        Some(_) => None,
        None => Some(1.0),
    };
    SourceEstimate::select(EstimatorKind::MlIrregular, scores, scale, seed)
}
