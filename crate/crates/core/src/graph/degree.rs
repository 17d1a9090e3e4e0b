use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degree law of a sampled tree: `(degree, probability)` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, f64)>", into = "Vec<(u32, f64)>")]
pub struct DegreeDistribution {
    support: Vec<(u32, f64)>,
    #[serde(skip)]
    index: Option<WeightedIndex<f64>>,
}

impl DegreeDistribution {
    pub fn new(mut support: Vec<(u32, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Config("empty degree distribution".into()));
        }
        support.sort_by_key(|&(d, _)| d);
        let mut total = 0.0;
        for (i, &(d, p)) in support.iter().enumerate() {
            if d < 2 {
                return Err(Error::Config(format!("degree {d} < 2 in distribution")));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::Config(format!("invalid probability {p} for degree {d}")));
            }
            if i > 0 && support[i - 1].0 == d {
                return Err(Error::Config(format!("degree {d} listed twice")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("probabilities sum to {total}, not 1")));
        }
        let index = WeightedIndex::new(support.iter().map(|&(_, p)| p))
            .map_err(|e| Error::Config(format!("degree distribution: {e}")))?;
        Ok(DegreeDistribution {
            support,
            index: Some(index),
        })
    }

    /// Point mass on one degree.
    pub fn fixed(degree: u32) -> Result<Self> {
        Self::new(vec![(degree, 1.0)])
    }

    /// Parses `3=0.5,4=0.5`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut support = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (d, p) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected degree=prob, got `{part}`")))?;
            let d = d
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad degree `{d}`")))?;
            let p = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad probability `{p}`")))?;
            support.push((d, p));
        }
        Self::new(support)
    }

    pub fn support(&self) -> &[(u32, f64)] {
        &self.support
    }

    pub fn min_degree(&self) -> u32 {
        self.support.iter().filter(|&&(_, p)| p > 0.0).map(|&(d, _)| d).min().unwrap_or(2)
    }

    pub fn max_degree(&self) -> u32 {
        self.support.iter().filter(|&&(_, p)| p > 0.0).map(|&(d, _)| d).max().unwrap_or(2)
    }

    /// `E[log(D - 1)]`.
    pub fn log_moment(&self) -> f64 {
        self.support
            .iter()
            .map(|&(d, p)| p * f64::from(d - 1).ln())
            .sum()
    }

    /// Per-step growth factor `exp(E[log(D - 1)])` of a ball in the tree.
    pub fn growth_factor(&self) -> f64 {
        self.log_moment().exp()
    }

    /// Threshold heuristic for the schedule degree: `1 + ceil(growth)`.
    pub fn suggested_d0(&self) -> u32 {
        1 + self.growth_factor().ceil() as u32
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let index = self.index.as_ref().expect("constructed through new()");
        self.support[index.sample(rng)].0
    }
}

impl PartialEq for DegreeDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support
    }
}

impl TryFrom<Vec<(u32, f64)>> for DegreeDistribution {
    type Error = Error;
    fn try_from(v: Vec<(u32, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DegreeDistribution> for Vec<(u32, f64)> {
    fn from(d: DegreeDistribution) -> Self {
        d.support
    }
}
