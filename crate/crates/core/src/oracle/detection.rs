use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::enumerate::{enumerate, DEFAULT_PATH_LIMIT};
use crate::error::{Error, Result};
use crate::estimate::Estimator;
use crate::graph::{ContactNetwork, NodeId};
use crate::spread::{InfectionSnapshot, Protocol};

/// Horizon limits for exhaustive enumeration.
pub const ENUM_MAX_T_TREE: u32 = 6;
pub const ENUM_MAX_T_LINE: u32 = 10;

fn horizon_guard(net: &ContactNetwork, protocol: &Protocol, t: u32) -> Result<()> {
    let on_line = matches!(protocol, Protocol::Line) || matches!(net, ContactNetwork::Ring { .. });
    let max = if on_line { ENUM_MAX_T_LINE } else { ENUM_MAX_T_TREE };
    if t > max {
        return Err(Error::TooLarge(format!("exhaustive enumeration supports T <= {max} here, got {t}")));
    }
    Ok(())
}

/// Exact probability that `estimator` names `source`, over every sample
/// path of `protocol` run for `t` steps. When the estimator's maximum is
/// shared by several nodes, the source gets the fraction of the tie.
pub fn oracle_detection_probability(
    protocol: &Protocol,
    net: &ContactNetwork,
    source: NodeId,
    t: u32,
    estimator: &Estimator,
) -> Result<BigRational> {
    horizon_guard(net, protocol, t)?;
    let outcomes = enumerate(DEFAULT_PATH_LIMIT, |coin| {
        let (snap, _) = protocol.run(net, source, t, coin)?;
        let est = estimator.estimate(&snap, net, 0)?;
        let top = est.argmax();
        Ok(if top.contains(&source) { top.len() } else { 0 })
    })?;
    let mut pd = BigRational::zero();
    for (p, ties) in outcomes {
        if ties > 0 {
            pd += p / BigRational::from_integer(BigInt::from(ties));
        }
    }
    Ok(pd)
}

fn undirected(edges: &Option<Vec<(NodeId, NodeId)>>) -> Option<BTreeSet<(NodeId, NodeId)>> {
    edges.as_ref().map(|es| es.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect())
}

/// Exact probability that `protocol` started at each infected node produces
/// `snap` (same infected set and, when recorded, the same undirected
/// subtree), by enumerating every sample path from every candidate.
pub fn oracle_snapshot_likelihoods(
    protocol: &Protocol,
    net: &ContactNetwork,
    snap: &InfectionSnapshot,
) -> Result<Vec<(NodeId, BigRational)>> {
    horizon_guard(net, protocol, snap.time)?;
    let want_edges = undirected(&snap.subtree_edges);
    snap.infected
        .iter()
        .map(|&v| {
            let outcomes = enumerate(DEFAULT_PATH_LIMIT, |coin| {
                let (s, _) = protocol.run(net, v, snap.time, coin)?;
                Ok(s.infected == snap.infected && (want_edges.is_none() || undirected(&s.subtree_edges) == want_edges))
            })?;
            let l = outcomes.into_iter().filter(|(_, hit)| *hit).map(|(p, _)| p).sum();
            Ok((v, l))
        })
        .collect()
}
