use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{
    oracle_adaptive_likelihoods, oracle_detection_probability, oracle_line_distribution, to_f64, triangular_size_law,
};
use crate::error::Result;
use crate::estimate::{estimate_ml_irregular, Estimator, EstimatorKind};
use crate::graph::{ContactNetwork, DegreeDistribution, FiniteGraph, NodeId};
use crate::rng::{domain, substream, RngCoin};
use crate::spread::{
    state_distribution_closed, state_distribution_recursive, AlphaSchedule, InfectionSnapshot, Protocol, ProtocolTag,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn outcome(name: &'static str, r: Result<(bool, String)>) -> CheckOutcome {
    match r {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome { name, passed: false, detail: format!("error: {e}") },
    }
}

/// The eight-node irregular example: center 3 with neighbors 2, 4, 5;
/// leaf 1 under 2, leaf 8 under 4, leaves 6 and 7 under 5. Pendant
/// uninfected nodes (labels from 100) give the infected nodes network
/// degrees 4, 2, 3, 2, 3, 2, 2, 8 for labels 1 to 8.
pub fn irregular_example() -> (ContactNetwork, InfectionSnapshot) {
    let infected_edges = [(3u64, 2u64), (3, 4), (3, 5), (2, 1), (4, 8), (5, 6), (5, 7)];
    let degree = [4usize, 2, 3, 2, 3, 2, 2, 8];
    let mut edges = infected_edges.to_vec();
    let mut next = 100;
    for (i, &d) in degree.iter().enumerate() {
        let v = i as u64 + 1;
        let have = infected_edges.iter().filter(|&&(a, b)| a == v || b == v).count();
        for _ in have..d {
            edges.push((v, next));
            next += 1;
        }
    }
    let net = ContactNetwork::finite(FiniteGraph::from_edges(edges));
    let id = |x: u64| net.resolve(x).expect("example node");
    let mut infected: Vec<NodeId> = (1..=8).map(id).collect();
    infected.sort_unstable();
    let snap = InfectionSnapshot {
        protocol: ProtocolTag::Adaptive,
        time: 4,
        infected,
        subtree_edges: Some(infected_edges.iter().map(|&(a, b)| (id(a), id(b))).collect()),
        virtual_source: Some(id(3)),
        d0: None,
        exhausted: false,
    };
    (net, snap)
}

fn check_alpha() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for d0 in 2..=6 {
        let s = AlphaSchedule::finite(d0)?;
        for t in (2..=30).step_by(2) {
            for h in 1..=t / 2 {
                worst = worst.max((s.alpha(t, h)? - to_f64(&s.alpha_exact(t, h)?)).abs());
            }
        }
    }
    Ok((worst < 1e-13, format!("max |float - exact| = {worst:e}")))
}

fn check_markov() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for d in 2..=6 {
        for t in (2..=40).step_by(2) {
            let a = state_distribution_closed(d, t)?;
            let b = state_distribution_recursive(d, t)?;
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok((worst < 1e-12, format!("max deviation {worst:e}")))
}

fn check_line_distribution() -> Result<(bool, String)> {
    for t in 0..=20 {
        let d = oracle_line_distribution(t)?;
        let u = rat(1, i64::from(t) + 1);
        let ok = d.left_marginal().iter().all(|p| *p == u)
            && d.right_marginal().iter().all(|p| *p == u)
            && d.is_independent()
            && d.size_law() == triangular_size_law(t);
        if !ok {
            return Ok((false, format!("T = {t} deviates")));
        }
    }
    Ok((true, "uniform independent marginals, triangular size law, T <= 20".into()))
}

fn check_detection() -> Result<(bool, String)> {
    let tree = ContactNetwork::regular_tree(3)?;
    let pd_tree = oracle_detection_probability(&Protocol::Tree, &tree, NodeId(0), 4, &Estimator::new(EstimatorKind::MlTree))?;
    let tree = ContactNetwork::regular_tree(3)?;
    let adaptive = Protocol::Adaptive { d0: AlphaSchedule::finite(3)?, cap: None };
    let pd_ad = oracle_detection_probability(&adaptive, &tree, NodeId(0), 4, &Estimator::new(EstimatorKind::MlAdaptive))?;
    let ring = ContactNetwork::ring(64)?;
    let pd_line = oracle_detection_probability(&Protocol::Line, &ring, NodeId(0), 4, &Estimator::new(EstimatorKind::MlLine))?;
    let ok = pd_tree == rat(1, 6) && pd_ad == rat(1, 9) && pd_line <= rat(9, 25);
    Ok((ok, format!("tree {pd_tree}, adaptive {pd_ad}, line {pd_line}")))
}

fn check_uniformity(seed: u64) -> Result<(bool, String)> {
    for d in 2..=4u32 {
        for t in [2u32, 4, 6] {
            let net = ContactNetwork::regular_tree(d)?;
            let sched = AlphaSchedule::finite(d)?;
            let p = Protocol::Adaptive { d0: sched, cap: None };
            let mut coin = RngCoin(substream(seed, domain::PROTOCOL, u64::from(d * 100 + t)));
            let (snap, _) = p.run(&net, NodeId(0), t, &mut coin)?;
            let sum = oracle_adaptive_likelihoods(&net, &snap.infected, sched, t)?;
            let vt = snap.virtual_source.expect("adaptive snapshot");
            let values: Vec<&BigRational> =
                sum.likelihoods.iter().filter(|(v, _)| *v != vt).map(|(_, l)| l).collect();
            if values.iter().any(|l| *l != values[0]) || !sum.get(vt).is_some_and(Zero::is_zero) {
                return Ok((false, format!("d = {d}, T = {t}: likelihoods differ")));
            }
        }
    }
    Ok((true, "equal likelihoods off the center for d in 2..=4, T in {2,4,6}".into()))
}

fn check_hop_marginal() -> Result<(bool, String)> {
    for d in 3..=4u32 {
        for t in [2u32, 4, 6] {
            let net = ContactNetwork::regular_tree(d)?;
            let sched = AlphaSchedule::finite(d)?;
            let p = Protocol::Adaptive { d0: sched, cap: None };
            let (snap, _) = p.run(&net, NodeId(0), t, &mut RngCoin(substream(1, domain::PROTOCOL, 0)))?;
            let sum = oracle_adaptive_likelihoods(&net, &snap.infected, sched, t)?;
            let vt = snap.virtual_source.expect("adaptive snapshot");
            let closed = state_distribution_closed(d, t)?;
            for (h, want) in closed.iter().enumerate() {
                let depth = h + 1;
                let node = sum
                    .likelihoods
                    .iter()
                    .find(|(v, _)| net.hop_distance(*v, vt).ok() == Some(depth))
                    .expect("node at every depth");
                let count = i64::from(d) * i64::from(d - 1).pow(h as u32);
                let got = to_f64(&(&node.1 * BigRational::from_integer(count.into())));
                if (got - want).abs() > 1e-12 {
                    return Ok((false, format!("d = {d}, T = {t}, h = {depth}: {got} vs {want}")));
                }
            }
        }
    }
    Ok((true, "hop law from trajectory sums matches the closed form".into()))
}

/// Whether `scores` are a constant multiple of `likelihoods`.
pub(crate) fn proportional(scores: &[(NodeId, f64)], likelihoods: &[(NodeId, BigRational)], tol: f64) -> bool {
    let mut ratio: Option<f64> = None;
    for ((v, s), (u, l)) in scores.iter().zip(likelihoods) {
        if v != u {
            return false;
        }
        let l = to_f64(l);
        if *s == 0.0 || l == 0.0 {
            if *s != 0.0 || l != 0.0 {
                return false;
            }
            continue;
        }
        let r = l / s;
        match ratio {
            None => ratio = Some(r),
            Some(r0) if ((r - r0) / r0).abs() > tol => return false,
            _ => {}
        }
    }
    ratio.is_some()
}

/// Compares the degree-message scores with trajectory sums on `count`
/// random small instances.
pub fn check_mismatch(seed: u64, count: usize) -> Result<(bool, String)> {
    let dist = DegreeDistribution::new(vec![(2, 1.0 / 3.0), (3, 1.0 / 3.0), (4, 1.0 / 3.0)])?;
    let mut done = 0;
    let mut attempt = 0u64;
    while done < count {
        attempt += 1;
        if attempt > 50 * count as u64 {
            return Ok((false, format!("only {done} instances small enough")));
        }
        let mut rng = RngCoin(substream(seed, domain::NETWORK, attempt));
        use crate::rng::Coin;
        let d0 = AlphaSchedule::finite(2 + rng.pick(3) as u32)?;
        let t = 2 * (1 + rng.pick(3) as u32);
        let net = ContactNetwork::sampled_tree(dist.clone(), 32, crate::rng::derive_seed(seed, domain::NETWORK, attempt))?;
        let p = Protocol::Adaptive { d0, cap: None };
        let (snap, _) = p.run(&net, NodeId(0), t, &mut rng)?;
        if snap.len() > 15 {
            continue;
        }
        let sum = oracle_adaptive_likelihoods(&net, &snap.infected, d0, t)?;
        let est = estimate_ml_irregular(&snap, &net, d0, t, 0)?;
        if !proportional(&est.scores, &sum.likelihoods, 1e-9) {
            return Ok((false, format!("instance {attempt} (d0 = {d0}, T = {t}) not proportional")));
        }
        done += 1;
    }
    Ok((true, format!("{done} random trees proportional within 1e-9")))
}

fn check_irregular_example() -> Result<(bool, String)> {
    let (net, snap) = irregular_example();
    let by_label = |d0: u32| -> Result<Vec<f64>> {
        let e = estimate_ml_irregular(&snap, &net, AlphaSchedule::finite(d0)?, 4, 0)?;
        (1..=8).map(|x| Ok(e.score(net.resolve(x)?).unwrap_or(f64::NAN))).collect()
    };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
    let two = by_label(2)?;
    let four = by_label(4)?;
    let s3 = AlphaSchedule::finite(3)?;
    let sum = oracle_adaptive_likelihoods(&net, &snap.infected, s3, 4)?;
    let five = sum.get(net.resolve(5)?).cloned().unwrap_or_default();
    let ok = close(&two, &[0.5, 1.0, 0.0, 1.0, 2.0 / 3.0, 0.5, 0.5, 0.25])
        && close(&four, &[3.0, 2.0, 0.0, 2.0, 4.0 / 3.0, 3.0, 3.0, 1.5])
        && five == rat(1, 9);
    Ok((ok, format!("d0=2 {two:?}, d0=4 {four:?}, likelihood(5 | d0=3) = {five}")))
}

/// Runs every oracle-equivalence check.
pub fn run_oracle_suite(seed: u64, random_trees: usize) -> OracleReport {
    let checks = vec![
        outcome("alpha-exact", check_alpha()),
        outcome("markov-closed-form", check_markov()),
        outcome("line-distribution", check_line_distribution()),
        outcome("detection-exact", check_detection()),
        outcome("adaptive-uniformity", check_uniformity(seed)),
        outcome("hop-marginal", check_hop_marginal()),
        outcome("irregular-example", check_irregular_example()),
        outcome("mismatch-vs-trajectories", check_mismatch(seed, random_trees)),
    ];
    OracleReport { passed: checks.iter().all(|c| c.passed), checks }
}
