use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{worker_count, ExperimentConfig, NetSpec};
use crate::error::{Error, Result};
use crate::estimate::Estimator;
use crate::graph::{ContactNetwork, NodeId};
use crate::rng::{derive_seed, domain, substream, RngCoin};
use crate::spread::{subtree_depths, AlphaSchedule, InfectionSnapshot, Protocol};

/// Aggregates at one observation time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    #[serde(rename = "T")]
    pub t: u32,
    pub trials: u64,
    pub pd: f64,
    pub pd_se: f64,
    pub mean_nt: f64,
    pub nt_se: f64,
    pub mean_hop: f64,
    pub hop_se: f64,
    /// `N_T -> count`.
    pub histogram: BTreeMap<usize, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub protocol: String,
    pub network: String,
    pub d0: Option<AlphaSchedule>,
    pub estimator: String,
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    /// Not part of the CSV, which must be reproducible.
    pub wall_time_secs: f64,
}

impl MetricsReport {
    pub fn row(&self, t: u32) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.t == t)
    }
}

#[derive(Debug, Clone, Default)]
struct Acc {
    hits: u64,
    nt: u128,
    nt2: u128,
    hop: u128,
    hop2: u128,
    hist: BTreeMap<usize, u64>,
}

impl Acc {
    fn add(&mut self, hit: bool, nt: usize, hop: usize) {
        self.hits += u64::from(hit);
        self.nt += nt as u128;
        self.nt2 += (nt as u128) * (nt as u128);
        self.hop += hop as u128;
        self.hop2 += (hop as u128) * (hop as u128);
        *self.hist.entry(nt).or_default() += 1;
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.hits += other.hits;
        self.nt += other.nt;
        self.nt2 += other.nt2;
        self.hop += other.hop;
        self.hop2 += other.hop2;
        for (k, c) in other.hist {
            *self.hist.entry(k).or_default() += c;
        }
        self
    }

    fn row(&self, t: u32, n: u64) -> MetricsRow {
        let nf = n as f64;
        let pd = self.hits as f64 / nf;
        let (mean_nt, nt_se) = mean_se(self.nt, self.nt2, n);
        let (mean_hop, hop_se) = mean_se(self.hop, self.hop2, n);
        MetricsRow {
            t,
            trials: n,
            pd,
            pd_se: (pd * (1.0 - pd) / nf).sqrt(),
            mean_nt,
            nt_se,
            mean_hop,
            hop_se,
            histogram: self.hist.clone(),
        }
    }
}

/// Sample mean and its standard error from integer sums.
fn mean_se(sum: u128, sum2: u128, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum as f64 / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum2 as f64 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(workers))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Source for trial `i`: the root on trees, uniform elsewhere.
fn trial_source(net: &ContactNetwork, seed: u64, i: u64) -> NodeId {
    match net.node_count() {
        Some(n) => NodeId::from_index(substream(seed, domain::SOURCE, i).random_range(0..n)),
        None => net.root(),
    }
}

struct Template {
    /// Shared network; `None` when every trial samples its own.
    net: Option<ContactNetwork>,
    depth: u32,
}

impl Template {
    fn new(spec: &NetSpec, depth: u32) -> Result<Self> {
        let net = if spec.is_random() { None } else { Some(spec.build(0, depth)?) };
        Ok(Template { net, depth })
    }

    fn network(&self, spec: &NetSpec, seed: u64, i: u64) -> Result<ContactNetwork> {
        match &self.net {
            // cloning gives every trial the same node numbering
            Some(n) => Ok(n.clone()),
            None => spec.build(derive_seed(seed, domain::NETWORK, i), self.depth),
        }
    }
}

fn hop(net: &ContactNetwork, snap: &InfectionSnapshot, source: NodeId, chosen: NodeId) -> Result<usize> {
    match (net, &snap.subtree_edges) {
        (ContactNetwork::Finite(_), Some(edges)) => subtree_depths(source, edges)
            .get(&chosen)
            .copied()
            .ok_or(Error::Unreachable(source, chosen)),
        _ => net.hop_distance(source, chosen),
    }
}

/// Runs `cfg.trials` independent trials and aggregates them per T.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut times = cfg.times.clone();
    times.sort_unstable();
    times.dedup();
    let tmax = cfg.max_time();
    let template = Template::new(&cfg.net, tmax + 2)?;
    let estimator = cfg.estimator.unwrap_or_else(|| Estimator::new(cfg.estimator_kind()));
    let seed = cfg.seed;

    let trial = |i: u64| -> Result<Vec<(bool, usize, usize)>> {
        let net = template.network(&cfg.net, seed, i)?;
        let source = trial_source(&net, seed, i);
        let mut coin = RngCoin(substream(seed, domain::PROTOCOL, i));
        let mut spreader = cfg.protocol.start(&net, source, tmax)?;
        let mut out = Vec::with_capacity(times.len());
        for (j, &t) in times.iter().enumerate() {
            while spreader.time() < t {
                spreader.step(&mut coin)?;
            }
            let snap = spreader.snapshot();
            let est_seed = derive_seed(seed, domain::ESTIMATOR, i.wrapping_mul(times.len() as u64) + j as u64);
            let est = estimator.estimate(&snap, &net, est_seed)?;
            let h = hop(&net, &snap, source, est.chosen)?;
            out.push((est.chosen == source, snap.len(), h));
        }
        Ok(out)
    };

    let zero = || vec![Acc::default(); times.len()];
    let accs = pool(cfg.workers)?.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .try_fold(zero, |mut accs, i| {
                for (acc, (hit, nt, h)) in accs.iter_mut().zip(trial(i)?) {
                    acc.add(hit, nt, h);
                }
                Ok::<_, Error>(accs)
            })
            .try_reduce(zero, |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()))
    })?;

    Ok(MetricsReport {
        protocol: cfg.protocol.tag().to_string(),
        network: cfg.net.to_string(),
        d0: cfg.protocol.d0(),
        estimator: estimator.kind.to_string(),
        seed,
        rows: times.iter().zip(&accs).map(|(&t, a)| a.row(t, cfg.trials)).collect(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Validates every cell, then runs them in order.
pub fn sweep(grid: &[ExperimentConfig]) -> Result<Vec<MetricsReport>> {
    for cfg in grid {
        cfg.validate()?;
    }
    grid.iter().map(run_monte_carlo).collect()
}

/// One CSV line per (report, T).
pub fn write_csv<W: Write>(reports: &[MetricsReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["protocol", "network", "d0", "T", "trials", "pd", "pd_se", "mean_nt", "nt_se", "mean_hop", "hop_se"])?;
    for r in reports {
        let d0 = r.d0.map(|d| d.to_string()).unwrap_or_default();
        for row in &r.rows {
            out.write_record([
                r.protocol.clone(),
                r.network.clone(),
                d0.clone(),
                row.t.to_string(),
                row.trials.to_string(),
                row.pd.to_string(),
                row.pd_se.to_string(),
                row.mean_nt.to_string(),
                row.nt_se.to_string(),
                row.mean_hop.to_string(),
                row.hop_se.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveragePoint {
    #[serde(rename = "T")]
    pub t: u32,
    pub coverage: f64,
}

/// Mean infected fraction at every `T in 0..=horizon` for adaptive
/// diffusion from a uniform source on a finite network.
pub fn coverage_curve(
    net: &ContactNetwork,
    d0: AlphaSchedule,
    cap: Option<usize>,
    horizon: u32,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<CoveragePoint>> {
    let n = net
        .node_count()
        .ok_or_else(|| Error::Config("coverage needs a finite network".into()))?;
    if trials == 0 {
        return Err(Error::Config("trial count must be at least 1".into()));
    }
    let protocol = Protocol::Adaptive { d0, cap };
    let steps = horizon as usize + 1;
    let trial = |i: u64| -> Result<Vec<u64>> {
        let source = trial_source(net, seed, i);
        let mut coin = RngCoin(substream(seed, domain::PROTOCOL, i));
        let mut s = protocol.start(net, source, horizon)?;
        let mut sizes = vec![s.infected_count() as u64];
        while s.time() < horizon {
            s.step(&mut coin)?;
            sizes.push(s.infected_count() as u64);
        }
        Ok(sizes)
    };
    let zero = || vec![0u64; steps];
    let totals = pool(workers)?.install(|| {
        (0..trials)
            .into_par_iter()
            .try_fold(zero, |mut acc, i| {
                for (a, s) in acc.iter_mut().zip(trial(i)?) {
                    *a += s;
                }
                Ok::<_, Error>(acc)
            })
            .try_reduce(zero, |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x + y).collect()))
    })?;
    Ok(totals
        .into_iter()
        .enumerate()
        .map(|(t, s)| CoveragePoint { t: t as u32, coverage: s as f64 / (trials as f64 * n as f64) })
        .collect())
}

pub fn write_coverage_csv<W: Write>(points: &[CoveragePoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}
