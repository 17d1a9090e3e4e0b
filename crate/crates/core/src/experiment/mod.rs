//! Seeded parallel Monte Carlo over protocols, networks and estimators.

mod monte;

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimate::{Estimator, EstimatorKind};
use crate::graph::{read_network, ContactNetwork, DegreeDistribution, Prune};
use crate::spread::{Protocol, ProtocolTag};

pub use monte::{coverage_curve, run_monte_carlo, sweep, write_coverage_csv, write_csv, CoveragePoint, MetricsReport, MetricsRow};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "RUMORSIM_WORKERS";
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Network description: `regular:<d>`, `line`, `ring:<n>`,
/// `sampled:<deg>=<p>,...[@seed]` or `edgelist:<path>`. A sampled tree
/// without a seed is redrawn for every trial.
#[derive(Debug, Clone, PartialEq)]
pub enum NetSpec {
    Regular { degree: u32 },
    Line,
    Ring { n: u32 },
    Sampled { dist: DegreeDistribution, seed: Option<u64> },
    EdgeList { path: PathBuf, min_degree: usize, prune: Prune },
}

impl NetSpec {
    /// Whether every trial gets its own freshly drawn network.
    pub fn is_random(&self) -> bool {
        matches!(self, NetSpec::Sampled { seed: None, .. })
    }

    pub fn is_tree(&self) -> bool {
        matches!(self, NetSpec::Regular { .. } | NetSpec::Line | NetSpec::Sampled { .. })
    }

    /// Builds the network. `seed` only matters for sampled trees without
    /// their own seed; `depth` bounds how far a sampled tree may grow.
    pub fn build(&self, seed: u64, depth: u32) -> Result<ContactNetwork> {
        match self {
            NetSpec::Regular { degree } => ContactNetwork::regular_tree(*degree),
            NetSpec::Line => Ok(ContactNetwork::line()),
            NetSpec::Ring { n } => ContactNetwork::ring(*n),
            NetSpec::Sampled { dist, seed: own } => ContactNetwork::sampled_tree(dist.clone(), depth, own.unwrap_or(seed)),
            NetSpec::EdgeList { path, min_degree, prune } => {
                let f = File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
                read_network(BufReader::new(f), *min_degree, *prune)
            }
        }
    }
}

impl fmt::Display for NetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetSpec::Regular { degree } => write!(f, "regular:{degree}"),
            NetSpec::Line => f.write_str("line"),
            NetSpec::Ring { n } => write!(f, "ring:{n}"),
            NetSpec::Sampled { dist, seed } => {
                let parts: Vec<String> = dist.support().iter().map(|(d, p)| format!("{d}={p}")).collect();
                write!(f, "sampled:{}", parts.join(","))?;
                match seed {
                    Some(s) => write!(f, "@{s}"),
                    None => Ok(()),
                }
            }
            NetSpec::EdgeList { path, .. } => write!(f, "edgelist:{}", path.display()),
        }
    }
}

impl FromStr for NetSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |what: &str| -> Result<u32> {
            arg.parse().map_err(|_| Error::Config(format!("{what} needs an integer, got `{arg}`")))
        };
        match kind {
            "regular" => {
                let degree = num("regular")?;
                if degree < 2 {
                    return Err(Error::Config(format!("regular tree degree must be >= 2, got {degree}")));
                }
                Ok(NetSpec::Regular { degree })
            }
            "line" if arg.is_empty() => Ok(NetSpec::Line),
            "ring" => {
                let n = num("ring")?;
                if n < 3 {
                    return Err(Error::Config(format!("ring needs at least 3 nodes, got {n}")));
                }
                Ok(NetSpec::Ring { n })
            }
            "sampled" => {
                let (dist, seed) = match arg.split_once('@') {
                    Some((d, s)) => {
                        let seed = s.parse().map_err(|_| Error::Config(format!("bad tree seed `{s}`")))?;
                        (d, Some(seed))
                    }
                    None => (arg, None),
                };
                Ok(NetSpec::Sampled { dist: DegreeDistribution::parse(dist)?, seed })
            }
            "edgelist" if !arg.is_empty() => {
                Ok(NetSpec::EdgeList { path: PathBuf::from(arg), min_degree: 0, prune: Prune::Single })
            }
            _ => Err(Error::Config(format!("unknown network `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub net: NetSpec,
    pub protocol: Protocol,
    /// `None` picks the natural estimator for the protocol.
    pub estimator: Option<Estimator>,
    pub times: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    /// `None` reads [`WORKERS_ENV`], then falls back to all cores.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(net: NetSpec, protocol: Protocol, times: Vec<u32>, seed: u64) -> Self {
        ExperimentConfig { net, protocol, estimator: None, times, trials: DEFAULT_TRIALS, seed, workers: None }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = Some(estimator);
        self
    }

    pub fn max_time(&self) -> u32 {
        self.times.iter().copied().max().unwrap_or(0)
    }

    pub(crate) fn estimator_kind(&self) -> EstimatorKind {
        match self.estimator {
            Some(e) => e.kind,
            None => default_estimator(self.protocol.tag(), &self.net),
        }
    }

    /// Checks the combination without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if self.times.is_empty() {
            return Err(Error::Config("no observation times given".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        let tmax = self.max_time();
        match self.protocol {
            Protocol::Line => match &self.net {
                NetSpec::Line => {}
                NetSpec::Regular { degree: 2 } => {}
                NetSpec::Ring { n } if u64::from(*n) >= 2 * u64::from(tmax) + 2 => {}
                NetSpec::Ring { n } => {
                    return Err(Error::Config(format!("ring of {n} nodes is too small for T = {tmax}")));
                }
                other => return Err(Error::Config(format!("line protocol cannot run on {other}"))),
            },
            Protocol::Tree => {
                if matches!(self.net, NetSpec::Ring { .. }) {
                    return Err(Error::Config("tree protocol needs an acyclic network".into()));
                }
            }
            Protocol::Diffusion { p } if !(p > 0.0 && p <= 1.0) => {
                return Err(Error::Config(format!("diffusion probability must be in (0, 1], got {p}")));
            }
            Protocol::Adaptive { cap: Some(0), .. } => {
                return Err(Error::Config("infection cap must be at least 1".into()));
            }
            _ => {}
        }
        let tag = self.protocol.tag();
        let kind = self.estimator_kind();
        let needs = |want: ProtocolTag| -> Result<()> {
            if tag == want {
                Ok(())
            } else {
                Err(Error::Config(format!("estimator {kind} expects {want} snapshots, not {tag}")))
            }
        };
        match kind {
            EstimatorKind::Jordan => {}
            EstimatorKind::MlLine => needs(ProtocolTag::Line)?,
            EstimatorKind::MlTree => needs(ProtocolTag::Tree)?,
            EstimatorKind::MlAdaptive => needs(ProtocolTag::Adaptive)?,
            EstimatorKind::MlIrregular | EstimatorKind::LeafGeneral => {
                needs(ProtocolTag::Adaptive)?;
                if let Some(t) = self.times.iter().find(|t| *t % 2 == 1) {
                    return Err(Error::Config(format!("estimator {kind} needs even T, got {t}")));
                }
                if kind == EstimatorKind::MlIrregular && !self.net.is_tree() {
                    return Err(Error::Config(format!("estimator {kind} needs a tree network")));
                }
            }
        }
        Ok(())
    }
}

/// Natural estimator for a protocol on a given kind of network.
pub fn default_estimator(tag: ProtocolTag, net: &NetSpec) -> EstimatorKind {
    match tag {
        ProtocolTag::Flood | ProtocolTag::Diffusion => EstimatorKind::Jordan,
        ProtocolTag::Line => EstimatorKind::MlLine,
        ProtocolTag::Tree => EstimatorKind::MlTree,
        ProtocolTag::Adaptive => match net {
            NetSpec::EdgeList { .. } | NetSpec::Ring { .. } => EstimatorKind::LeafGeneral,
            NetSpec::Sampled { .. } => EstimatorKind::MlIrregular,
            _ => EstimatorKind::MlAdaptive,
        },
    }
}

/// Worker count from the config, the environment, or the machine.
pub fn worker_count(configured: Option<usize>) -> usize {
    configured
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()).filter(|&n| n > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
