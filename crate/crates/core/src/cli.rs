//! Command-line driver. Results go to files or stdout; stderr carries only
//! progress and the seed actually used.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimate::{ring_posterior, Estimator, EstimatorKind, DEFAULT_TAIL_TOLERANCE};
use crate::experiment::{
    coverage_curve, sweep, write_coverage_csv, write_csv, ExperimentConfig, NetSpec, DEFAULT_TRIALS,
};
use crate::graph::{ContactNetwork, NodeId, Prune};
use crate::oracle::run_oracle_suite;
use crate::rng::{derive_seed, domain, substream};
use crate::spread::{AlphaSchedule, InfectionSnapshot, Protocol, SnapshotRecord, TraceEvent};

#[derive(Debug, Parser)]
#[command(name = "rumorsim", version, about = "Source-hiding message spreading and source estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one protocol and write the snapshot seen at time T.
    Simulate(SimulateArgs),
    /// Estimate the source of a saved snapshot.
    Estimate(EstimateArgs),
    /// Monte Carlo detection statistics, or coverage with --coverage.
    Experiment(ExperimentArgs),
    /// Exact source posterior for a segment of m infected nodes on a ring.
    Posterior(PosteriorArgs),
    /// Cross-check the fast paths against exhaustive enumeration.
    OracleCheck(OracleArgs),
    /// Write a network as an edge list.
    GenGraph(GenGraphArgs),
}

#[derive(Debug, Args)]
pub struct NetArgs {
    /// regular:<d>, line, ring:<n>, sampled:<deg>=<p>,...[@seed], edgelist:<path>
    #[arg(long)]
    pub net: String,
    /// Drop nodes with fewer neighbors when loading an edge list.
    #[arg(long, default_value_t = 1)]
    pub min_degree: usize,
    /// single or iterated.
    #[arg(long, default_value = "single")]
    pub prune: Prune,
}

impl NetArgs {
    fn spec(&self) -> Result<NetSpec> {
        let mut spec: NetSpec = self.net.parse()?;
        if let NetSpec::EdgeList { min_degree, prune, .. } = &mut spec {
            *min_degree = self.min_degree;
            *prune = self.prune;
        }
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// flood, diffusion:<p>, line, tree or adaptive.
    #[arg(long)]
    pub protocol: String,
    /// Adaptive diffusion schedule parameter: an integer >= 2 or inf.
    #[arg(long)]
    pub d0: Option<AlphaSchedule>,
    /// Per-step infection cap for adaptive diffusion.
    #[arg(long)]
    pub cap: Option<usize>,
}

impl ProtocolArgs {
    fn protocol(&self, d0: Option<AlphaSchedule>) -> Result<Protocol> {
        let mut p: Protocol = self.protocol.parse()?;
        match &mut p {
            Protocol::Adaptive { d0: sched, cap } => {
                if let Some(d) = d0 {
                    *sched = d;
                }
                *cap = self.cap;
            }
            _ if self.cap.is_some() => {
                return Err(Error::Config("--cap only applies to adaptive diffusion".into()));
            }
            _ => {}
        }
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long = "T")]
    pub t: u32,
    /// Source label; defaults to the root of a tree or a seeded uniform node.
    #[arg(long)]
    pub source: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Snapshot JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trace JSON of token moves and infections.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Network as materialized by the run, needed to estimate on trees.
    #[arg(long)]
    pub net_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Snapshot JSON written by `simulate`.
    #[arg(long)]
    pub snapshot: PathBuf,
    #[command(flatten)]
    pub net: NetArgs,
    /// jordan, ml-line, ml-tree, ml-adaptive, ml-irregular or leaf-general;
    /// defaults to the natural choice for the snapshot's protocol.
    #[arg(long)]
    pub estimator: Option<EstimatorKind>,
    #[arg(long)]
    pub d0: Option<AlphaSchedule>,
    /// Observation time assumed by the estimator.
    #[arg(long = "T")]
    pub t: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Repeat to sweep over several networks.
    #[arg(long, required = true)]
    pub net: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub min_degree: usize,
    #[arg(long, default_value = "single")]
    pub prune: Prune,
    #[arg(long)]
    pub protocol: String,
    /// Comma-separated schedule values to sweep, e.g. `3,4,5` or `inf`.
    #[arg(long, value_delimiter = ',')]
    pub d0: Vec<AlphaSchedule>,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub estimator: Option<EstimatorKind>,
    /// Observation times: `10,50,100`, `2..10` or a mix.
    #[arg(long = "T")]
    pub t: String,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to RUMORSIM_WORKERS or all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full JSON report including histograms.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Mean infected fraction per step up to the largest T instead.
    #[arg(long)]
    pub coverage: bool,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long = "T")]
    pub t: u32,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random small trees for the likelihood cross-check.
    #[arg(long, default_value_t = 40)]
    pub trees: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Depth to which a tree is materialized.
    #[arg(long, default_value_t = 4)]
    pub depth: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_precondition() {
                2
            } else {
                1
            }
        }
    }
}

/// Runs a parsed command; `Ok(false)` means it completed with failures.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Estimate(a) => estimate(a).map(|_| true),
        Command::Experiment(a) => experiment(a).map(|_| true),
        Command::Posterior(a) => posterior(a).map(|_| true),
        Command::OracleCheck(a) => oracle_check(a),
        Command::GenGraph(a) => gen_graph(a).map(|_| true),
    }
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

fn network(spec: &NetSpec, seed: u64, depth: u32) -> Result<ContactNetwork> {
    spec.build(derive_seed(seed, domain::NETWORK, 0), depth)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let spec = a.net.spec()?;
    let protocol = a.protocol.protocol(a.protocol.d0)?;
    let net = network(&spec, seed, a.t + 2)?;
    let source = match (a.source, net.node_count()) {
        (Some(label), _) => net.resolve(label)?,
        (None, Some(n)) => {
            use rand::Rng;
            NodeId::from_index(substream(seed, domain::SOURCE, 0).random_range(0..n))
        }
        (None, None) => net.root(),
    };
    let mut coin = crate::rng::RngCoin(substream(seed, domain::PROTOCOL, 0));
    let (snap, trace) = protocol.run(&net, source, a.t, &mut coin)?;
    write_json(&a.out, &snap.to_record(&net))?;
    if let Some(path) = &a.trace {
        let labelled: Vec<TraceEvent<u64>> = trace.into_iter().map(|e| e.map(|v| net.label(v))).collect();
        write_json(&Some(path.clone()), &labelled)?;
    }
    if let Some(path) = &a.net_out {
        net.write_edge_list(BufWriter::new(File::create(path)?))?;
    }
    eprintln!("infected {} nodes by T = {}", snap.len(), snap.time);
    Ok(())
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let rec: SnapshotRecord = read_json(&a.snapshot)?;
    let spec = a.net.spec()?;
    let net = network(&spec, seed, rec.t + 2)?;
    let snap = InfectionSnapshot::from_record(&rec, &net)?;
    let mut est = match a.estimator {
        Some(k) => Estimator::new(k),
        None => Estimator::for_protocol(snap.protocol, &net),
    };
    est.d0 = a.d0;
    est.assumed_t = a.t;
    let result = est.estimate(&snap, &net, derive_seed(seed, domain::ESTIMATOR, 0))?;
    write_json(&a.out, &result.to_record(&net))
}

/// Parses `1,3,5..8` into a sorted list without duplicates.
pub fn parse_times(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::Config(format!("bad observation times `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: u32 = lo.parse().map_err(|_| bad())?;
                let hi: u32 = hi.trim_start_matches('=').parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let times = parse_times(&a.t)?;
    let proto = ProtocolArgs { protocol: a.protocol.clone(), d0: None, cap: a.cap };
    let schedules: Vec<Option<AlphaSchedule>> =
        if a.d0.is_empty() { vec![None] } else { a.d0.iter().copied().map(Some).collect() };
    let nets = a
        .net
        .iter()
        .map(|n| NetArgs { net: n.clone(), min_degree: a.min_degree, prune: a.prune }.spec())
        .collect::<Result<Vec<_>>>()?;

    if a.coverage {
        let ([spec], [d0]) = (nets.as_slice(), schedules.as_slice()) else {
            return Err(Error::Config("--coverage takes a single network and d0".into()));
        };
        let Protocol::Adaptive { d0, cap } = proto.protocol(*d0)? else {
            return Err(Error::Config("--coverage runs adaptive diffusion".into()));
        };
        let horizon = *times.last().expect("parse_times is non-empty");
        let net = network(spec, seed, horizon + 2)?;
        eprintln!("coverage on {spec} with d0 = {d0}");
        let curve = coverage_curve(&net, d0, cap, horizon, a.trials, seed, a.workers)?;
        return write_coverage_csv(&curve, output(&a.out)?);
    }

    let mut grid = Vec::new();
    for spec in &nets {
        for d0 in &schedules {
            let mut cfg = ExperimentConfig::new(spec.clone(), proto.protocol(*d0)?, times.clone(), seed)
                .with_trials(a.trials);
            cfg.estimator = a.estimator.map(Estimator::new);
            cfg.workers = a.workers;
            grid.push(cfg);
        }
    }
    eprintln!("running {} configuration(s) of {} trials", grid.len(), a.trials);
    let reports = sweep(&grid)?;
    for r in &reports {
        eprintln!("{} on {} finished in {:.2}s", r.protocol, r.network, r.wall_time_secs);
    }
    if let Some(path) = &a.json {
        write_json(&Some(path.clone()), &reports)?;
    }
    write_csv(&reports, output(&a.out)?)
}

fn posterior(a: PosteriorArgs) -> Result<()> {
    let p = ring_posterior(a.m, a.t, a.tolerance)?;
    let mut w = csv::Writer::from_writer(output(&a.out)?);
    w.write_record(["k", "posterior"])?;
    for (i, x) in p.iter().enumerate() {
        w.write_record([(i + 1).to_string(), x.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn oracle_check(a: OracleArgs) -> Result<bool> {
    let report = run_oracle_suite(a.seed, a.trees);
    for c in &report.checks {
        eprintln!("{} {}", if c.passed { "ok  " } else { "FAIL" }, c.name);
    }
    write_json(&a.out, &report)?;
    Ok(report.passed)
}

fn gen_graph(a: GenGraphArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let net = network(&a.net.spec()?, seed, a.depth)?;
    if let ContactNetwork::Tree(tree) = &net {
        let mut queue = VecDeque::from([net.root()]);
        while let Some(v) = queue.pop_front() {
            if tree.depth(v)? < a.depth {
                for w in net.neighbors(v)? {
                    if tree.parent(w)? == Some(v) {
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    let mut w = output(&a.out)?;
    net.write_edge_list(&mut w)?;
    w.flush()?;
    Ok(())
}
