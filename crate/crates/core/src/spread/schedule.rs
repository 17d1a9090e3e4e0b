use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Token-keeping schedule of adaptive diffusion, parameterized by the
/// assumed degree `d0` (or the always-pass mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlphaSchedule {
    d0: Option<u32>,
}

impl AlphaSchedule {
    pub fn finite(d0: u32) -> Result<Self> {
        if d0 < 2 {
            return Err(Error::Config(format!("d0 must be >= 2 or inf, got {d0}")));
        }
        Ok(AlphaSchedule { d0: Some(d0) })
    }

    /// `d0 = inf`: the virtual source always passes the token.
    pub fn infinite() -> Self {
        AlphaSchedule { d0: None }
    }

    pub fn d0(&self) -> Option<u32> {
        self.d0
    }

    pub fn is_infinite(&self) -> bool {
        self.d0.is_none()
    }

    fn check(t: u32, h: u32) -> Result<()> {
        if t < 2 || t % 2 == 1 {
            return Err(Error::Contract(format!("alpha needs even t >= 2, got t = {t}")));
        }
        if h < 1 || h > t / 2 {
            return Err(Error::Contract(format!("alpha needs 1 <= h <= t/2 = {}, got h = {h}", t / 2)));
        }
        Ok(())
    }

    /// Probability that the virtual source keeps the token at even time `t`
    /// when it is `h` hops from the true source.
    ///
    /// For `d0 > 2` this is `((d0-1)^(t/2-h+1) - 1) / ((d0-1)^(t/2+1) - 1)`,
    /// evaluated as `r^-h * expm1(-a ln r) / expm1(-b ln r)` so large `t`
    /// neither overflows nor cancels.
    pub fn alpha(&self, t: u32, h: u32) -> Result<f64> {
        Self::check(t, h)?;
        Ok(match self.d0 {
            None => 0.0,
            Some(2) => f64::from(t - 2 * h + 2) / f64::from(t + 2),
            Some(d0) => {
                let ln_r = f64::from(d0 - 1).ln();
                let a = f64::from(t / 2 - h + 1);
                let b = f64::from(t / 2 + 1);
                (-f64::from(h) * ln_r).exp() * (-a * ln_r).exp_m1() / (-b * ln_r).exp_m1()
            }
        })
    }

    /// Exact rational value of [`AlphaSchedule::alpha`].
    pub fn alpha_exact(&self, t: u32, h: u32) -> Result<BigRational> {
        Self::check(t, h)?;
        Ok(match self.d0 {
            None => BigRational::zero(),
            Some(2) => BigRational::new(BigInt::from(t - 2 * h + 2), BigInt::from(t + 2)),
            Some(d0) => {
                let r = BigInt::from(d0 - 1);
                let num: BigInt = Pow::pow(&r, t / 2 - h + 1) - BigInt::one();
                let den: BigInt = Pow::pow(&r, t / 2 + 1) - BigInt::one();
                BigRational::new(num, den)
            }
        })
    }

    /// Distribution of the hop distance `h_t` between the true source and
    /// the virtual source at even `t`, obtained by pushing `[1]` at `t = 2`
    /// through the bidiagonal keep/pass transition matrices.
    pub fn hop_distribution(&self, t: u32) -> Result<Vec<f64>> {
        if t < 2 || t % 2 == 1 {
            return Err(Error::Contract(format!("hop distribution needs even t >= 2, got {t}")));
        }
        let mut p = vec![1.0];
        for s in (2..t).step_by(2) {
            let mut next = vec![0.0; p.len() + 1];
            for (i, &mass) in p.iter().enumerate() {
                let keep = self.alpha(s, i as u32 + 1)?;
                next[i] += mass * keep;
                next[i + 1] += mass * (1.0 - keep);
            }
            p = next;
        }
        Ok(p)
    }

    /// Exact counterpart of [`AlphaSchedule::hop_distribution`].
    pub fn hop_distribution_exact(&self, t: u32) -> Result<Vec<BigRational>> {
        if t < 2 || t % 2 == 1 {
            return Err(Error::Contract(format!("hop distribution needs even t >= 2, got {t}")));
        }
        let mut p = vec![BigRational::one()];
        for s in (2..t).step_by(2) {
            let mut next = vec![BigRational::zero(); p.len() + 1];
            for (i, mass) in p.iter().enumerate() {
                let keep = self.alpha_exact(s, i as u32 + 1)?;
                next[i + 1] += mass * (BigRational::one() - &keep);
                next[i] += mass * keep;
            }
            p = next;
        }
        Ok(p)
    }
}

/// Target law of `h_t` on a `d`-regular tree: geometric weights
/// `(d-2)(d-1)^(h-1) / ((d-1)^(t/2) - 1)` for `d > 2`, uniform `2/t` on a
/// line.
pub fn state_distribution_closed(d: u32, t: u32) -> Result<Vec<f64>> {
    if d < 2 {
        return Err(Error::Config(format!("degree must be >= 2, got {d}")));
    }
    if t < 2 || t % 2 == 1 {
        return Err(Error::Contract(format!("state distribution needs even t >= 2, got {t}")));
    }
    let k = t / 2;
    if d == 2 {
        return Ok(vec![2.0 / f64::from(t); k as usize]);
    }
    let ln_r = f64::from(d - 1).ln();
    // (d-2) r^(h-1) / (r^k - 1) = (d-2) r^(h-1-k) / (1 - r^-k)
    let denom = -(-f64::from(k) * ln_r).exp_m1();
    Ok((1..=k)
        .map(|h| f64::from(d - 2) * ((f64::from(h) - 1.0 - f64::from(k)) * ln_r).exp() / denom)
        .collect())
}

/// The same law obtained by running the Markov chain built from the
/// schedule with `d0 = d`.
pub fn state_distribution_recursive(d: u32, t: u32) -> Result<Vec<f64>> {
    AlphaSchedule::finite(d)?.hop_distribution(t)
}

impl fmt::Display for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.d0 {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for AlphaSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" => Ok(Self::infinite()),
            other => {
                let d0 = other
                    .parse()
                    .map_err(|_| Error::Config(format!("d0 must be an integer >= 2 or `inf`, got `{other}`")))?;
                Self::finite(d0)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum D0Repr {
    Num(u32),
    Text(String),
}

impl Serialize for AlphaSchedule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.d0 {
            Some(d) => D0Repr::Num(d),
            None => D0Repr::Text("inf".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlphaSchedule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match D0Repr::deserialize(d)? {
            D0Repr::Num(n) => AlphaSchedule::finite(n).map_err(serde::de::Error::custom),
            D0Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn alpha_examples() {
        let s3 = AlphaSchedule::finite(3).unwrap();
        assert!((s3.alpha(2, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s3.alpha_exact(2, 1).unwrap(), rat(1, 3));
        let s2 = AlphaSchedule::finite(2).unwrap();
        assert!((s2.alpha(4, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s2.alpha_exact(4, 2).unwrap(), rat(1, 3));
        let inf = AlphaSchedule::infinite();
        for t in (2..40).step_by(2) {
            for h in 1..=t / 2 {
                assert_eq!(inf.alpha(t, h).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn alpha_contract() {
        let s = AlphaSchedule::finite(3).unwrap();
        assert!(matches!(s.alpha(3, 1), Err(Error::Contract(_))));
        assert!(matches!(s.alpha(4, 0), Err(Error::Contract(_))));
        assert!(matches!(s.alpha(4, 3), Err(Error::Contract(_))));
        assert!(AlphaSchedule::finite(1).is_err());
    }

    #[test]
    fn alpha_float_matches_exact_and_stays_in_range() {
        for d0 in 2..8 {
            let s = AlphaSchedule::finite(d0).unwrap();
            for t in (2..=30).step_by(2) {
                for h in 1..=t / 2 {
                    let a = s.alpha(t, h).unwrap();
                    let e = s.alpha_exact(t, h).unwrap();
                    let ef = e.numer().to_string().parse::<f64>().unwrap() / e.denom().to_string().parse::<f64>().unwrap();
                    assert!((a - ef).abs() < 1e-13, "d0={d0} t={t} h={h}");
                    assert!((0.0..1.0).contains(&a));
                }
            }
        }
        // large t stays finite
        let a = AlphaSchedule::finite(5).unwrap().alpha(2000, 3).unwrap();
        assert!(a.is_finite() && a > 0.0 && a < 1.0);
    }

    #[test]
    fn closed_form_examples() {
        let p = state_distribution_closed(3, 4).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(state_distribution_closed(2, 6).unwrap(), vec![1.0 / 3.0; 3]);
        for d in 2..7 {
            let p = state_distribution_closed(d, 2).unwrap();
            assert_eq!(p.len(), 1);
            assert!((p[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn recursion_examples() {
        let p = state_distribution_recursive(3, 4).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15);
        let q = state_distribution_recursive(2, 8).unwrap();
        for x in q {
            assert!((x - 0.25).abs() < 1e-15);
        }
        let exact = AlphaSchedule::finite(2).unwrap().hop_distribution_exact(8).unwrap();
        assert!(exact.iter().all(|x| *x == rat(1, 4)));
    }

    #[test]
    fn recursion_equals_closed_form() {
        for d in 2..=6 {
            for t in (2..=40).step_by(2) {
                let a = state_distribution_closed(d, t).unwrap();
                let b = state_distribution_recursive(d, t).unwrap();
                assert_eq!(a.len(), b.len());
                let sum: f64 = b.iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-12, "d={d} t={t}");
                }
            }
        }
    }

    #[test]
    fn infinite_schedule_always_passes() {
        let p = AlphaSchedule::infinite().hop_distribution(10).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn serde_forms() {
        assert_eq!(serde_json::to_string(&AlphaSchedule::infinite()).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&AlphaSchedule::finite(4).unwrap()).unwrap(), "4");
        let s: AlphaSchedule = serde_json::from_str("3").unwrap();
        assert_eq!(s.d0(), Some(3));
        assert!(serde_json::from_str::<AlphaSchedule>("1").is_err());
        assert_eq!("inf".parse::<AlphaSchedule>().unwrap(), AlphaSchedule::infinite());
    }
}
