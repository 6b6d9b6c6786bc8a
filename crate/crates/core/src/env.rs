//! Stochastic bandit environments with binary rewards.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::kl::Probability;
use crate::rng::RngStream;

/// Gaps and thresholds are snapped to this many decimals so that decimal
/// configs like `0.8 - 0.6` compare equal to `0.2`.
const SNAP_SCALE: f64 = 1e12;

#[inline]
pub(crate) fn snap(x: f64) -> f64 {
    (x * SNAP_SCALE).round() / SNAP_SCALE
}

/// Underlying `[0, 1]`-valued law of a randomized-rounding arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundedLaw {
    /// Affine image `offset + scale * Y` of `Y ~ Beta(a, b)`, using the widest
    /// scale that keeps the support in `[0, 1]` and the arm's mean exact.
    Beta { a: f64, b: f64 },
    /// All mass on the arm mean.
    PointMass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardKind {
    Bernoulli,
    BoundedRounded(BoundedLaw),
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bernoulli => f.write_str("bernoulli"),
            Self::BoundedRounded(BoundedLaw::Beta { a, b }) => write!(f, "bounded:beta({a},{b})"),
            Self::BoundedRounded(BoundedLaw::PointMass) => f.write_str("bounded:point"),
        }
    }
}

impl FromStr for RewardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "reward kind",
            input: s.to_owned(),
        };
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s == "bernoulli" {
            return Ok(Self::Bernoulli);
        }
        let law = s.strip_prefix("bounded:").ok_or_else(bad)?;
        if law == "point" {
            return Ok(Self::BoundedRounded(BoundedLaw::PointMass));
        }
        let args = law
            .strip_prefix("beta(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (a, b) = args.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.parse().map_err(|_| bad())?;
        let b: f64 = b.parse().map_err(|_| bad())?;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(bad());
        }
        Ok(Self::BoundedRounded(BoundedLaw::Beta { a, b }))
    }
}

/// Arm means plus the reward mechanism. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    gaps: Vec<f64>,
    mu_star: f64,
    kind: RewardKind,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, kind: RewardKind) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidConfig("an instance needs at least one arm".into()));
        }
        for &m in &means {
            Probability::new(m)?;
        }
        let mu_star = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gaps = means.iter().map(|&m| snap(mu_star - m)).collect();
        Ok(Self {
            means,
            gaps,
            mu_star,
            kind,
        })
    }

    pub fn bernoulli(means: Vec<f64>) -> Result<Self> {
        Self::new(means, RewardKind::Bernoulli)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    /// `mu_star - mean[arm]`, snapped to 12 decimals.
    pub fn gap_of(&self, arm: usize) -> Result<f64> {
        self.gaps.get(arm).copied().ok_or(Error::ArmOutOfRange {
            arm,
            arms: self.num_arms(),
        })
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Draws a reward in `{0, 1}` for `arm`, advancing `rng` by exactly one
    /// word.
    ///
    /// Bernoulli arms compare that word, as a uniform double, against the
    /// mean. Bounded arms use it to seed a private generator that draws
    /// `X` from the underlying law and then returns `1` with probability `X`.
    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Result<u8> {
        let mean = *self.means.get(arm).ok_or(Error::ArmOutOfRange {
            arm,
            arms: self.num_arms(),
        })?;
        match self.kind {
            RewardKind::Bernoulli => Ok(u8::from(rng.next_f64() < mean)),
            RewardKind::BoundedRounded(law) => {
                let mut local = rng.child();
                let x = match law {
                    BoundedLaw::PointMass => mean,
                    BoundedLaw::Beta { a, b } => {
                        let (offset, scale) = beta_affine(a, b, mean);
                        if scale > 0.0 {
                            let y = Beta::new(a, b)
                                .expect("validated Beta parameters")
                                .sample(&mut local);
                            offset + scale * y
                        } else {
                            mean
                        }
                    }
                };
                Ok(u8::from(local.next_f64() < x))
            }
        }
    }
}

/// Offset and scale placing `Beta(a, b)` inside `[0, 1]` with mean `mean`.
fn beta_affine(a: f64, b: f64, mean: f64) -> (f64, f64) {
    let m = a / (a + b);
    let scale = (mean / m).min((1.0 - mean) / (1.0 - m));
    (mean - scale * m, scale)
}
