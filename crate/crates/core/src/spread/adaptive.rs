use std::collections::{BTreeMap, HashSet, VecDeque};

use super::infection::Infection;
use super::{AlphaSchedule, InfectionSnapshot, ProtocolTag, Spreader, TraceEvent};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId};
use crate::rng::{Chance, Coin};

/// Adaptive diffusion.
///
/// A virtual-source token starts one hop from the source. At every even
/// time `t` its holder keeps it with probability `alpha(t, h)`, growing the
/// infection by one symmetric ring and then idling for a step, or passes it
/// to a subtree neighbor other than the previous holder, after which the
/// infection grows twice on the side away from the previous holder.
/// Infection messages travel through the infected subtree within a step;
/// every node reached infects its uninfected contacts, at most `cap` of
/// them per step if a cap is set.
#[derive(Debug, Clone)]
pub struct AdaptiveDiffusion<'a> {
    net: &'a ContactNetwork,
    sched: AlphaSchedule,
    cap: Option<usize>,
    source: NodeId,
    t: u32,
    inf: Infection,
    token: NodeId,
    prev: Option<NodeId>,
    h: u32,
    /// Expansion still owed from the last pass: `(root, blocked)`.
    pending: Option<(NodeId, NodeId)>,
    exhausted: bool,
    trace: Vec<TraceEvent>,
}

impl<'a> AdaptiveDiffusion<'a> {
    pub fn new(net: &'a ContactNetwork, source: NodeId, sched: AlphaSchedule, cap: Option<usize>) -> Result<Self> {
        if cap == Some(0) {
            return Err(Error::Config("infection cap must be at least 1".into()));
        }
        if net.degree(source)? == 0 {
            return Err(Error::Config(format!("source {} has no neighbors", net.label(source))));
        }
        Ok(AdaptiveDiffusion {
            net,
            sched,
            cap,
            source,
            t: 0,
            inf: Infection::new(source),
            token: source,
            prev: None,
            h: 0,
            pending: None,
            exhausted: false,
            trace: Vec::new(),
        })
    }

    pub fn virtual_source(&self) -> NodeId {
        self.token
    }

    /// Hop count between the source and the token holder, as tracked by
    /// the protocol.
    pub fn h(&self) -> u32 {
        self.h
    }

    /// Relays an infection message from `root` through the infected subtree
    /// without entering `blocked`. Every node reached infects its uninfected
    /// contacts; a node claimed by several infectors gets one chosen
    /// uniformly.
    fn expand(&mut self, root: NodeId, blocked: Option<NodeId>, t: u32, coin: &mut dyn Coin) -> Result<()> {
        let mut seen: HashSet<NodeId> = HashSet::from([root]);
        if let Some(b) = blocked {
            seen.insert(b);
        }
        let mut queue = VecDeque::from([root]);
        let mut claims: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        while let Some(x) = queue.pop_front() {
            for y in self.inf.subtree_neighbors(x) {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
            let open = self.inf.uninfected_neighbors(self.net, x)?;
            let chosen = match self.cap {
                Some(k) if open.len() > k => coin.choose_subset(open.len(), k).into_iter().map(|i| open[i]).collect(),
                _ => open,
            };
            for w in chosen {
                claims.entry(w).or_default().push(x);
            }
        }
        for (w, by) in claims {
            let infector = match by.len() {
                1 => by[0],
                n => by[coin.pick(n)],
            };
            self.inf.infect(infector, w);
            self.trace.push(TraceEvent::Infect { t, infector, infectee: w });
        }
        Ok(())
    }
}

impl Spreader for AdaptiveDiffusion<'_> {
    fn time(&self) -> u32 {
        self.t
    }

    fn step(&mut self, coin: &mut dyn Coin) -> Result<()> {
        let t = self.t + 1;
        if self.t == 0 {
            let nbrs = self.net.neighbors(self.source)?;
            let u = nbrs[coin.pick(nbrs.len())];
            self.inf.infect(self.source, u);
            self.trace.push(TraceEvent::Pass { t, from: self.source, to: u, h: 1 });
            self.trace.push(TraceEvent::Infect { t, infector: self.source, infectee: u });
            self.prev = Some(self.source);
            self.token = u;
            self.h = 1;
            self.pending = Some((u, self.source));
        } else if self.t % 2 == 1 {
            if let Some((root, blocked)) = self.pending.take() {
                self.expand(root, Some(blocked), t, coin)?;
            }
        } else {
            let mut keep = coin.flip(Chance::Keep { sched: self.sched, t: self.t, h: self.h });
            let mut targets = Vec::new();
            if !keep {
                targets = self.inf.subtree_neighbors(self.token);
                targets.retain(|&w| Some(w) != self.prev);
                // deterministic order: as listed by the network
                let order = self.net.neighbors(self.token)?;
                targets.sort_by_key(|w| order.iter().position(|x| x == w));
                if targets.is_empty() {
                    keep = true;
                    self.exhausted = true;
                }
            }
            if keep {
                self.trace.push(TraceEvent::Keep { t, at: self.token, h: self.h });
                self.expand(self.token, None, t, coin)?;
            } else {
                let u = targets[coin.pick(targets.len())];
                let old = self.token;
                self.prev = Some(old);
                self.token = u;
                self.h += 1;
                self.trace.push(TraceEvent::Pass { t, from: old, to: u, h: self.h });
                self.expand(u, Some(old), t, coin)?;
                self.pending = Some((u, old));
            }
        }
        self.t = t;
        Ok(())
    }

    fn snapshot(&self) -> InfectionSnapshot {
        InfectionSnapshot {
            protocol: ProtocolTag::Adaptive,
            time: self.t,
            infected: self.inf.sorted(),
            subtree_edges: Some(self.inf.edges().to_vec()),
            virtual_source: (self.t > 0).then_some(self.token),
            d0: Some(self.sched),
            exhausted: self.exhausted,
        }
    }

    fn infected_count(&self) -> usize {
        self.inf.len()
    }

    fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::super::{advance, subtree_depths};
    use super::*;
    use crate::graph::{DegreeDistribution, FiniteGraph};
    use crate::rng::{substream, RngCoin};

    fn coin(seed: u64) -> RngCoin<rand_chacha::ChaCha8Rng> {
        RngCoin(substream(seed, 1, 0))
    }

    fn balanced_about_token(s: &AdaptiveDiffusion, t: u32) {
        let snap = s.snapshot();
        let edges = snap.subtree_edges.as_ref().unwrap();
        let depth = subtree_depths(s.virtual_source(), edges);
        assert_eq!(depth.len(), snap.len());
        let g = snap.graph(s.net).unwrap();
        for leaf in g.leaves() {
            assert_eq!(depth[&leaf], t as usize / 2, "t={t}");
        }
    }

    #[test]
    fn size_on_ternary_tree_is_deterministic() {
        for seed in 0..20 {
            let net = ContactNetwork::regular_tree(3).unwrap();
            let mut s = AdaptiveDiffusion::new(&net, NodeId(0), AlphaSchedule::finite(3).unwrap(), None).unwrap();
            advance(&mut s, 4, &mut coin(seed)).unwrap();
            assert_eq!(s.infected_count(), 10);
        }
    }

    #[test]
    fn line_odd_sizes() {
        let sched = AlphaSchedule::finite(2).unwrap();
        let mut seen = HashSet::new();
        for seed in 0..200 {
            let net = ContactNetwork::line();
            let mut s = AdaptiveDiffusion::new(&net, NodeId(0), sched, None).unwrap();
            advance(&mut s, 5, &mut coin(seed)).unwrap();
            seen.insert(s.infected_count());
        }
        assert_eq!(seen, HashSet::from([6, 7]));
    }

    #[test]
    fn balanced_on_regular_and_sampled_trees() {
        let dist = DegreeDistribution::parse("3=0.5,4=0.3,5=0.2").unwrap();
        for seed in 0..10 {
            for net in [
                ContactNetwork::regular_tree(3).unwrap(),
                ContactNetwork::sampled_tree(dist.clone(), 64, seed).unwrap(),
            ] {
                for sched in [AlphaSchedule::finite(3).unwrap(), AlphaSchedule::infinite()] {
                    let mut s = AdaptiveDiffusion::new(&net, NodeId(0), sched, None).unwrap();
                    let mut c = coin(seed);
                    for t in 1..=16 {
                        s.step(&mut c).unwrap();
                        if t % 2 == 0 {
                            balanced_about_token(&s, t);
                            let h = net.hop_distance(NodeId(0), s.virtual_source()).unwrap();
                            assert_eq!(h as u32, s.h());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn infected_sets_are_nested_and_h_moves_by_at_most_one() {
        let net = ContactNetwork::regular_tree(4).unwrap();
        let mut s = AdaptiveDiffusion::new(&net, NodeId(0), AlphaSchedule::finite(4).unwrap(), None).unwrap();
        let mut c = coin(9);
        let mut last = s.snapshot().infected;
        let mut last_h = 0;
        for t in 1..=12 {
            s.step(&mut c).unwrap();
            let now = s.snapshot().infected;
            assert!(last.iter().all(|v| now.binary_search(v).is_ok()));
            if t >= 2 {
                assert!(s.h() >= 1 && s.h() - last_h <= 1);
            }
            last = now;
            last_h = s.h();
        }
    }

    #[test]
    fn same_seed_same_run() {
        let go = || {
            let net = ContactNetwork::regular_tree(3).unwrap();
            let mut s = AdaptiveDiffusion::new(&net, NodeId(0), AlphaSchedule::finite(3).unwrap(), None).unwrap();
            advance(&mut s, 9, &mut coin(42)).unwrap();
            (s.snapshot(), s.trace().to_vec())
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn cap_and_collisions_on_a_cycle() {
        let edges = (0..12u64).map(|i| (i, (i + 1) % 12)).chain([(0, 6), (3, 9)]);
        let net = ContactNetwork::finite(FiniteGraph::from_edges(edges));
        for seed in 0..30 {
            let mut s = AdaptiveDiffusion::new(&net, NodeId(0), AlphaSchedule::finite(3).unwrap(), Some(1)).unwrap();
            advance(&mut s, 8, &mut coin(seed)).unwrap();
            let snap = s.snapshot();
            let g = snap.graph(&net).unwrap();
            assert!(g.is_tree());
        }
    }

    #[test]
    fn exhaustion_keeps_token() {
        let net = ContactNetwork::finite(FiniteGraph::from_edges([(0, 1)]));
        let mut s = AdaptiveDiffusion::new(&net, NodeId(0), AlphaSchedule::infinite(), None).unwrap();
        advance(&mut s, 4, &mut coin(1)).unwrap();
        let snap = s.snapshot();
        assert!(snap.exhausted);
        assert_eq!(snap.len(), 2);
    }

    #[test]
    fn isolated_source_is_an_error() {
        let net = ContactNetwork::finite(FiniteGraph::from_edges([(0, 1)]));
        assert!(AdaptiveDiffusion::new(&net, NodeId(5), AlphaSchedule::infinite(), None).is_err());
    }
}
