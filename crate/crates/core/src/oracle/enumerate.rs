use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rng::{Chance, Coin};

/// Default cap on the number of enumerated sample paths.
pub const DEFAULT_PATH_LIMIT: usize = 4_000_000;

/// A [`Coin`] that follows a scripted prefix of choices and takes the first
/// branch past its end, recording the arity and probability of each draw.
struct ScriptCoin<'a> {
    script: &'a mut Vec<Draw>,
    pos: usize,
    prob: BigRational,
    failure: Option<Error>,
}

#[derive(Debug, Clone)]
struct Draw {
    choice: usize,
    arity: usize,
    /// Branch probabilities, indexed by choice. Empty means uniform.
    weights: Vec<BigRational>,
}

impl ScriptCoin<'_> {
    fn draw(&mut self, arity: usize, weights: Vec<BigRational>) -> usize {
        if self.pos == self.script.len() {
            self.script.push(Draw { choice: 0, arity, weights });
        }
        let d = &self.script[self.pos];
        debug_assert_eq!(d.arity, arity, "replay diverged");
        let choice = d.choice;
        if d.weights.is_empty() {
            self.prob /= BigRational::from_integer(BigInt::from(arity));
        } else {
            self.prob *= &d.weights[choice];
        }
        self.pos += 1;
        choice
    }
}

impl Coin for ScriptCoin<'_> {
    fn pick(&mut self, n: usize) -> usize {
        assert!(n > 0, "pick from an empty range");
        if n == 1 {
            return 0;
        }
        self.draw(n, Vec::new())
    }

    fn flip(&mut self, chance: Chance) -> bool {
        let Some(p) = chance.exact() else {
            self.failure.get_or_insert(Error::Unsupported(format!(
                "cannot enumerate a coin with inexact probability {}",
                chance.value()
            )));
            return false;
        };
        if p.is_zero() {
            return false;
        }
        if p.is_one() {
            return true;
        }
        let q = BigRational::one() - &p;
        self.draw(2, vec![p, q]) == 0
    }
}

/// Runs `run` once per outcome of every random draw it makes, replaying
/// from scratch each time, and returns each outcome with its exact
/// probability. `run` must be deterministic given the draws.
///
/// Zero-probability branches are skipped. Fails with [`Error::TooLarge`]
/// past `limit` outcomes.
pub fn enumerate<T>(
    limit: usize,
    mut run: impl FnMut(&mut dyn Coin) -> Result<T>,
) -> Result<Vec<(BigRational, T)>> {
    let mut script: Vec<Draw> = Vec::new();
    let mut out = Vec::new();
    loop {
        if out.len() >= limit {
            return Err(Error::TooLarge(format!("more than {limit} sample paths")));
        }
        let mut coin = ScriptCoin { script: &mut script, pos: 0, prob: BigRational::one(), failure: None };
        let value = run(&mut coin)?;
        if let Some(e) = coin.failure {
            return Err(e);
        }
        let (prob, used) = (coin.prob, coin.pos);
        script.truncate(used);
        out.push((prob, value));
        // advance to the next branch in depth-first order
        loop {
            match script.last_mut() {
                None => return Ok(out),
                Some(d) if d.choice + 1 < d.arity => {
                    d.choice += 1;
                    break;
                }
                Some(_) => {
                    script.pop();
                }
            }
        }
    }
}
