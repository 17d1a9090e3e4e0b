use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId};
use crate::spread::AlphaSchedule;

pub const TRAJECTORY_MAX_T: u32 = 8;
pub const TRAJECTORY_MAX_NODES: usize = 64;

/// Exact likelihood of a snapshot under each candidate source, summed over
/// all token trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySum {
    /// One entry per infected node, sorted by node.
    pub likelihoods: Vec<(NodeId, BigRational)>,
    /// Trajectories that regenerated the snapshot.
    pub trajectories: u64,
    /// Infected nodes the token can end on.
    pub end_nodes: Vec<NodeId>,
}

impl TrajectorySum {
    pub fn get(&self, v: NodeId) -> Option<&BigRational> {
        self.likelihoods.binary_search_by_key(&v, |(u, _)| *u).ok().map(|i| &self.likelihoods[i].1)
    }
}

/// Nodes within `radius` hops of `center`, with their distances.
fn ball(net: &ContactNetwork, center: NodeId, radius: u32) -> Result<HashMap<NodeId, (u32, Option<NodeId>)>> {
    let mut seen = HashMap::from([(center, (0, None))]);
    let mut queue = VecDeque::from([center]);
    while let Some(u) = queue.pop_front() {
        let du = seen[&u].0;
        if du == radius {
            continue;
        }
        for w in net.neighbors(u)? {
            if !seen.contains_key(&w) {
                seen.insert(w, (du + 1, Some(u)));
                queue.push_back(w);
            }
        }
    }
    Ok(seen)
}

fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Infected set produced by a given token trajectory, computed from the
/// network geometry: a symmetric step adds every neighbor of the infected
/// set, an asymmetric step from `u` away from `old` only adds neighbors of
/// nodes closer to `u` than to `old`.
fn replay(
    net: &ContactNetwork,
    path: &[NodeId],
    passes: &BTreeSet<u32>,
    t: u32,
) -> Result<BTreeSet<NodeId>> {
    let grow = |set: &BTreeSet<NodeId>, side: Option<(NodeId, NodeId)>| -> Result<BTreeSet<NodeId>> {
        let mut out = set.clone();
        for &x in set {
            if let Some((u, old)) = side {
                if net.hop_distance(x, u)? >= net.hop_distance(x, old)? {
                    continue;
                }
            }
            out.extend(net.neighbors(x)?);
        }
        Ok(out)
    };
    let mut set = BTreeSet::from([path[0], path[1]]);
    let mut k = 1;
    set = grow(&set, Some((path[1], path[0])))?;
    for s in (2..t).step_by(2) {
        if passes.contains(&s) {
            k += 1;
            let side = Some((path[k], path[k - 1]));
            set = grow(&set, side)?;
            set = grow(&set, side)?;
        } else {
            set = grow(&set, None)?;
        }
    }
    Ok(set)
}

/// Sums, for every infected node as the candidate source, the probability
/// of every token trajectory ending at a node whose `T/2`-ball is the
/// infected set: `1/deg(v0) Π 1/(deg(x)-1)` over the path interior for the
/// token's moves, times the keep/pass probabilities for each placement of
/// the passes among the even decision times. Every trajectory is replayed
/// and only those reproducing the infected set are counted.
pub fn oracle_adaptive_likelihoods(
    net: &ContactNetwork,
    infected: &[NodeId],
    d0: AlphaSchedule,
    t: u32,
) -> Result<TrajectorySum> {
    if !net.is_acyclic() {
        return Err(Error::Config("trajectory oracle needs an acyclic network".into()));
    }
    if t > TRAJECTORY_MAX_T {
        return Err(Error::TooLarge(format!("trajectory oracle supports T <= {TRAJECTORY_MAX_T}, got {t}")));
    }
    if infected.len() > TRAJECTORY_MAX_NODES {
        return Err(Error::TooLarge(format!(
            "trajectory oracle supports at most {TRAJECTORY_MAX_NODES} infected nodes, got {}",
            infected.len()
        )));
    }
    if t % 2 == 1 {
        return Err(Error::Unsupported(format!("trajectory oracle needs even T, got {t}")));
    }
    let observed: BTreeSet<NodeId> = infected.iter().copied().collect();
    let mut likelihoods: Vec<(NodeId, BigRational)> = observed.iter().map(|&v| (v, BigRational::zero())).collect();
    if t == 0 {
        if observed.len() == 1 {
            likelihoods[0].1 = BigRational::one();
        }
        return Ok(TrajectorySum { likelihoods, trajectories: u64::from(observed.len() == 1), end_nodes: vec![] });
    }
    let radius = t / 2;
    let mut end_nodes = Vec::new();
    let mut trajectories = 0;
    for &end in &observed {
        let b = ball(net, end, radius)?;
        if b.len() != observed.len() || !observed.iter().all(|v| b.contains_key(v)) {
            continue;
        }
        end_nodes.push(end);
        for (slot, &v0) in observed.iter().enumerate() {
            let delta = b[&v0].0;
            if delta == 0 {
                continue;
            }
            // path v0 -> end by following parents toward the center
            let mut path = vec![v0];
            while let Some(p) = b[path.last().unwrap()].1 {
                path.push(p);
            }
            let mut a = ratio(1, net.degree(v0)?);
            for &x in &path[1..path.len() - 1] {
                let d = net.degree(x)?;
                if d < 2 {
                    a = BigRational::zero();
                    break;
                }
                a *= ratio(1, d - 1);
            }
            if a.is_zero() {
                continue;
            }
            let decisions: Vec<u32> = (2..t).step_by(2).collect();
            let need = delta as usize - 1;
            if need > decisions.len() {
                continue;
            }
            for mask in 0u32..(1 << decisions.len()) {
                if mask.count_ones() as usize != need {
                    continue;
                }
                let passes: BTreeSet<u32> =
                    decisions.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &s)| s).collect();
                let mut bterm = BigRational::one();
                let mut h = 1;
                for &s in &decisions {
                    let keep = d0.alpha_exact(s, h)?;
                    if passes.contains(&s) {
                        bterm *= BigRational::one() - keep;
                        h += 1;
                    } else {
                        bterm *= keep;
                    }
                }
                if bterm.is_zero() || replay(net, &path, &passes, t)? != observed {
                    continue;
                }
                trajectories += 1;
                likelihoods[slot].1 += &a * bterm;
            }
        }
    }
    Ok(TrajectorySum { likelihoods, trajectories, end_nodes })
}
