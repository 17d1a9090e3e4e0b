use rumorsim::estimate::{estimate_leaf_general, estimate_ml_irregular};
use rumorsim::graph::{ContactNetwork, DegreeDistribution, NodeId};
use rumorsim::oracle::{oracle_adaptive_likelihoods, oracle_snapshot_likelihoods, to_f64};
use rumorsim::rng::{substream, RngCoin};
use rumorsim::spread::{AlphaSchedule, Protocol};

/// The trajectory model behind the estimators must be the protocol itself.
#[test]
fn protocol_enumeration_equals_trajectory_sums_on_irregular_trees() {
    let dist = DegreeDistribution::new(vec![(2, 0.2), (3, 0.4), (4, 0.4)]).unwrap();
    let mut checked = 0;
    for seed in 0..8u64 {
        for (d0, t) in [(2u32, 2u32), (3, 2), (4, 2), (3, 4), (4, 4)] {
            let net = ContactNetwork::sampled_tree(dist.clone(), 8, seed).unwrap();
            let sched = AlphaSchedule::finite(d0).unwrap();
            let p = Protocol::Adaptive { d0: sched, cap: None };
            let (snap, _) = p.run(&net, NodeId(0), t, &mut RngCoin(substream(seed, 1, 0))).unwrap();
            if snap.exhausted {
                continue;
            }
            let mut bare = snap.clone();
            bare.subtree_edges = None;
            let direct = oracle_snapshot_likelihoods(&p, &net, &bare).unwrap();
            let model = oracle_adaptive_likelihoods(&net, &snap.infected, sched, t).unwrap();
            assert_eq!(direct, model.likelihoods, "seed {seed}, d0 {d0}, T {t}");
            checked += 1;
        }
    }
    assert!(checked >= 30, "only {checked} snapshots checked");
}

/// Scaled scores are absolute likelihoods, not just proportional ones.
#[test]
fn scaled_scores_are_likelihoods() {
    let dist = DegreeDistribution::new(vec![(3, 0.5), (4, 0.5)]).unwrap();
    let (mut interior, mut leaves) = (0, 0);
    for seed in 0..6u64 {
        for (d0, t) in [(3u32, 2u32), (3, 4), (4, 4), (5, 6)] {
            let net = ContactNetwork::sampled_tree(dist.clone(), 10, seed).unwrap();
            let sched = AlphaSchedule::finite(d0).unwrap();
            let p = Protocol::Adaptive { d0: sched, cap: None };
            let (snap, _) = p.run(&net, NodeId(0), t, &mut RngCoin(substream(seed, 1, 0))).unwrap();
            if snap.len() > 64 {
                continue;
            }
            let model = oracle_adaptive_likelihoods(&net, &snap.infected, sched, t).unwrap();
            let est = estimate_ml_irregular(&snap, &net, sched, t, 0).unwrap();
            let leaf = estimate_leaf_general(&snap, &net, sched, t, 0).unwrap();
            let scale = est.scale.unwrap();
            for (v, l) in &model.likelihoods {
                let want = to_f64(l);
                let got = est.score(*v).unwrap() * scale;
                interior += 1;
                assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "seed {seed}: {got} vs {want}");
                let g = snap.graph(&net).unwrap();
                if g.degree(*v).unwrap() <= 1 {
                    let lg = leaf.score(*v).unwrap() * leaf.scale.unwrap();
                    assert!((lg - want).abs() <= 1e-12 * want.max(1e-300), "leaf {seed}: {lg} vs {want}");
                    leaves += 1;
                }
            }
        }
    }
    assert!(interior >= 100 && leaves >= 50, "checked {interior} nodes, {leaves} leaves");
}
