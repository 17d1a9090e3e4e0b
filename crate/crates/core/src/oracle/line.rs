use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest horizon accepted by [`oracle_line_distribution`].
pub const LINE_ORACLE_MAX_T: u32 = 100;

/// Exact joint law of the left and right extension counts of the line
/// protocol at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineDistribution {
    pub t: u32,
    /// `joint[l][r]`
    pub joint: Vec<Vec<BigRational>>,
}

fn frac(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Dynamic program over both boundaries at once: at step `s` a boundary at
/// offset `x` moves out with probability `(x + 1) / (s + 1)`, independently
/// of the other side.
pub fn oracle_line_distribution(t: u32) -> Result<LineDistribution> {
    if t > LINE_ORACLE_MAX_T {
        return Err(Error::TooLarge(format!("line oracle supports T <= {LINE_ORACLE_MAX_T}, got {t}")));
    }
    let n = t as usize + 1;
    let mut joint = vec![vec![BigRational::zero(); n]; n];
    joint[0][0] = BigRational::one();
    for s in 1..=t as usize {
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for l in 0..s {
            for r in 0..s {
                let mass = &joint[l][r];
                if mass.is_zero() {
                    continue;
                }
                let pl = frac(l as u64 + 1, s as u64 + 1);
                let pr = frac(r as u64 + 1, s as u64 + 1);
                let (ql, qr) = (BigRational::one() - &pl, BigRational::one() - &pr);
                next[l + 1][r + 1] += mass * &pl * &pr;
                next[l + 1][r] += mass * &pl * &qr;
                next[l][r + 1] += mass * &ql * &pr;
                next[l][r] += mass * &ql * &qr;
            }
        }
        joint = next;
    }
    Ok(LineDistribution { t, joint })
}

impl LineDistribution {
    pub fn left_marginal(&self) -> Vec<BigRational> {
        self.joint.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn right_marginal(&self) -> Vec<BigRational> {
        let n = self.joint.len();
        (0..n).map(|r| self.joint.iter().map(|row| &row[r]).sum()).collect()
    }

    /// Whether the joint law equals the product of its marginals.
    pub fn is_independent(&self) -> bool {
        let (a, b) = (self.left_marginal(), self.right_marginal());
        self.joint
            .iter()
            .enumerate()
            .all(|(l, row)| row.iter().enumerate().all(|(r, p)| *p == &a[l] * &b[r]))
    }

    /// Law of the infected count `l + r + 1`, indexed by count (entry 0 is
    /// always zero).
    pub fn size_law(&self) -> Vec<BigRational> {
        let n = self.joint.len();
        let mut out = vec![BigRational::zero(); 2 * n];
        for (l, row) in self.joint.iter().enumerate() {
            for (r, p) in row.iter().enumerate() {
                out[l + r + 1] += p;
            }
        }
        out
    }
}

/// Triangular law of the infected count: `k/(T+1)^2` for `k <= T+1` and
/// `(2T+2-k)/(T+1)^2` above.
pub fn triangular_size_law(t: u32) -> Vec<BigRational> {
    let t = u64::from(t);
    let den = (t + 1) * (t + 1);
    (0..=2 * t + 1)
        .map(|k| match k {
            0 => BigRational::zero(),
            k if k <= t + 1 => frac(k, den),
            k => frac(2 * t + 2 - k, den),
        })
        .collect()
}
