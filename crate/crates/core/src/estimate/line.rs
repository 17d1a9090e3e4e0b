use super::{EstimatorKind, SourceEstimate};
use crate::error::{Error, Result};
use crate::graph::{ContactNetwork, NodeId};
use crate::spread::InfectionSnapshot;

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// The infected segment in path order.
fn segment(snap: &InfectionSnapshot, net: &ContactNetwork) -> Result<Vec<NodeId>> {
    let g = snap.graph(net)?;
    if !g.is_tree() || g.nodes().iter().any(|&v| g.degree(v).map_or(true, |d| d > 2)) {
        return Err(Error::Contract("line snapshot must be a path".into()));
    }
    match g.leaves().as_slice() {
        [v] => Ok(vec![*v]),
        [a, b] => g.path(*a, *b),
        _ => Err(Error::Contract("line snapshot must be a path".into())),
    }
}

/// Maximum-likelihood estimator for line-protocol snapshots observed at
/// time `t`: uniform over the positions whose distance to both ends of the
/// segment is at most `t`.
pub fn estimate_ml_line(snap: &InfectionSnapshot, net: &ContactNetwork, t: u32, seed: u64) -> Result<SourceEstimate> {
    let seg = segment(snap, net)?;
    let m = seg.len();
    let t = t as usize;
    if m > 2 * t + 1 {
        return Err(Error::Infeasible(format!("segment of {m} nodes cannot arise in {t} steps")));
    }
    let feasible = |i: usize| i <= t && m - 1 - i <= t;
    let count = (0..m).filter(|&i| feasible(i)).count();
    let w = 1.0 / count as f64;
    let scores = seg
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, if feasible(i) { w } else { 0.0 }))
        .collect();
    SourceEstimate::select(EstimatorKind::MlLine, scores, None, seed)
}

/// Posterior of the source position `k = 1..=m` over an infected segment of
/// `m` nodes on a large ring with a uniform source prior:
///
/// `P(k) ∝ Σ_{s ≥ max(m-k, k-1)} (1/(s+1)²) ((m+1)/(s+2) - k(m-k+1)/(s+2)²)`.
///
/// The series is summed backwards from the first index `N` whose tail bound
/// `(m+1) / (2N²)` is below `tail_tolerance`.
pub fn ring_posterior(m: usize, t: u32, tail_tolerance: f64) -> Result<Vec<f64>> {
    if !(tail_tolerance > 0.0 && tail_tolerance.is_finite()) {
        return Err(Error::Config(format!("tail tolerance must be positive, got {tail_tolerance}")));
    }
    if m == 0 {
        return Err(Error::Contract("segment must be non-empty".into()));
    }
    if m > 2 * t as usize + 1 {
        return Err(Error::Infeasible(format!("segment of {m} nodes cannot arise in {t} steps")));
    }
    let cutoff = ((m as f64 + 1.0) / (2.0 * tail_tolerance)).sqrt().floor() as usize + 1;
    let top = cutoff.max(m);
    let mut g1 = vec![0.0; m];
    let mut g2 = vec![0.0; m];
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for s in (0..top).rev() {
        let x = s as f64;
        let base = 1.0 / ((x + 1.0) * (x + 1.0) * (x + 2.0));
        a += base;
        b += base / (x + 2.0);
        if s < m {
            g1[s] = a;
            g2[s] = b;
        }
    }
    let mf = m as f64;
    let raw: Vec<f64> = (1..=m)
        .map(|k| {
            let s = (m - k).max(k - 1);
            let kf = k as f64;
            (mf + 1.0) * g1[s] - kf * (mf - kf + 1.0) * g2[s]
        })
        .collect();
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / z).collect())
}
