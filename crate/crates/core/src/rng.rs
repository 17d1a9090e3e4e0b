//! Randomness plumbing.
//!
//! Protocols never touch an RNG directly. They draw through [`Coin`], which
//! has two implementations: [`RngCoin`] for simulation and the exhaustive
//! enumerator in [`crate::oracle`], which walks every outcome of every draw
//! with exact probabilities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spread::AlphaSchedule;

/// A probability as requested by a protocol. Kept symbolic so that the
/// enumerator can evaluate it exactly.
#[derive(Debug, Clone, Copy)]
pub enum Chance {
    /// `num / den`
    Ratio { num: u64, den: u64 },
    /// Token-keeping probability of the adaptive diffusion schedule.
    Keep {
        sched: AlphaSchedule,
        t: u32,
        h: u32,
    },
    /// A floating-point probability with no exact counterpart.
    Real(f64),
}

impl Chance {
    pub fn value(&self) -> f64 {
        match *self {
            Chance::Ratio { num, den } => num as f64 / den as f64,
            Chance::Keep { sched, t, h } => sched
                .alpha(t, h)
                .expect("keep chance built from a checked (t, h)"),
            Chance::Real(p) => p,
        }
    }

    /// Exact value, or `None` for [`Chance::Real`].
    pub fn exact(&self) -> Option<BigRational> {
        match *self {
            Chance::Ratio { num, den } => Some(BigRational::new(BigInt::from(num), BigInt::from(den))),
            Chance::Keep { sched, t, h } => sched.alpha_exact(t, h).ok(),
            Chance::Real(p) if p == 0.0 => Some(BigRational::zero()),
            Chance::Real(p) if p == 1.0 => Some(BigRational::one()),
            Chance::Real(_) => None,
        }
    }
}

/// Source of protocol randomness.
pub trait Coin {
    /// Uniform index in `0..n`. `n` must be positive.
    fn pick(&mut self, n: usize) -> usize;
    /// Bernoulli draw.
    fn flip(&mut self, chance: Chance) -> bool;

    /// Uniformly random `k`-subset of `0..n` (all of it when `k >= n`),
    /// drawn by sequential picks without replacement. Returned sorted.
    fn choose_subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        if k >= n {
            return (0..n).collect();
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let i = self.pick(pool.len());
            out.push(pool.remove(i));
        }
        out.sort_unstable();
        out
    }
}

/// [`Coin`] backed by any `rand` generator.
pub struct RngCoin<R>(pub R);

impl<R: Rng> Coin for RngCoin<R> {
    fn pick(&mut self, n: usize) -> usize {
        assert!(n > 0, "pick from an empty range");
        self.0.random_range(0..n)
    }

    fn flip(&mut self, chance: Chance) -> bool {
        let p = chance.value();
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.0.random::<f64>() < p
        }
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent generator for `(master, domain, index)`. Each domain gets its
/// own key; within a domain, `index` selects a ChaCha stream.
pub fn substream(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}

/// Derived 64-bit seed for `(master, domain, index)`.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(domain)) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Domains used to split a master seed.
pub mod domain {
    pub const PROTOCOL: u64 = 1;
    pub const NETWORK: u64 = 2;
    pub const SOURCE: u64 = 3;
    pub const ESTIMATOR: u64 = 4;
}
