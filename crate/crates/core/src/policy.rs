//! Thompson Sampling and epsilon-TS.
//!
//! epsilon-TS keeps the usual success/pull counters but changes how an arm's
//! score is drawn:
//!
//! * if the empirical mean exceeds `1 - eps`, the score is that mean;
//! * otherwise `alpha = floor(S / (1 - eps)) + 1`, `beta = N + 2 - alpha`, and
//!   the score is `(1 - eps) * Y` with `Y ~ Beta(alpha, beta)`.
//!
//! Scores on the first branch exceed `1 - eps` and scores on the second never
//! do, so an arm whose mean clears the threshold always beats a sampled one.
//!
//! Randomness budget: each `select` consumes exactly `K + 1` words from the
//! stream, one per arm (used to seed that arm's Beta sampler, or discarded on
//! the empirical-mean branch) and one for tie-breaking.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Gamma};
use smallvec::SmallVec;

use crate::error::{precondition, Error, Result};
use crate::kl::Probability;
use crate::rng::{RngStream, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    VanillaTs,
    EpsTs(Probability),
}

impl PolicyKind {
    pub fn eps_ts(eps: f64) -> Result<Self> {
        let eps = Probability::new(eps)?;
        if eps.get() >= 1.0 {
            return Err(precondition("epsilon-TS needs eps < 1"));
        }
        Ok(Self::EpsTs(eps))
    }

    pub fn eps(&self) -> f64 {
        match self {
            Self::VanillaTs => 0.0,
            Self::EpsTs(e) => e.get(),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VanillaTs => f.write_str("ts"),
            Self::EpsTs(e) => write!(f, "eps-ts:{e}"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ts" {
            return Ok(Self::VanillaTs);
        }
        s.strip_prefix("eps-ts:")
            .and_then(|e| e.trim().parse::<f64>().ok())
            .map(Self::eps_ts)
            .unwrap_or_else(|| {
                Err(Error::Parse {
                    what: "policy",
                    input: s.to_owned(),
                })
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArmStats {
    pub pulls: u64,
    pub successes: u64,
}

impl ArmStats {
    /// `S / N`, defined as `0` for an unpulled arm.
    #[inline]
    pub fn empirical_mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.successes as f64 / self.pulls as f64
        }
    }
}

/// Beta posterior parameters used on the sampling branch of epsilon-TS.
///
/// With `eps = 0` this is the standard `Beta(S + 1, N - S + 1)` posterior.
pub fn posterior_params(successes: u64, pulls: u64, eps: Probability) -> Result<(u64, u64)> {
    let scale = 1.0 - eps.get();
    if scale <= 0.0 {
        return Err(precondition("eps must be below 1"));
    }
    if successes > pulls {
        return Err(precondition(format!("S = {successes} exceeds N = {pulls}")));
    }
    if pulls > 0 && successes as f64 / pulls as f64 > scale {
        return Err(precondition(format!(
            "empirical mean {successes}/{pulls} is above 1 - eps; the Beta branch does not apply"
        )));
    }
    let ratio = successes as f64 / scale;
    // Exact quotients such as 4 / 0.8 can land a hair off the integer.
    let nearest = ratio.round();
    let floor = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    let alpha = (floor as u64).min(pulls) + 1;
    Ok((alpha, pulls + 2 - alpha))
}

/// `Y ~ Beta(alpha, beta)` as `G_a / (G_a + G_b)` with unit-scale Gamma draws.
pub fn sample_beta(alpha: u64, beta: u64, rng: &mut SplitMix64) -> f64 {
    let ga = Gamma::new(alpha as f64, 1.0).expect("alpha >= 1").sample(rng);
    let gb = Gamma::new(beta as f64, 1.0).expect("beta >= 1").sample(rng);
    ga / (ga + gb)
}

/// Counters of one running policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    kind: PolicyKind,
    arms: Vec<ArmStats>,
}

impl PolicyState {
    pub fn new(kind: PolicyKind, num_arms: usize) -> Self {
        assert!(num_arms >= 1, "a policy needs at least one arm");
        Self {
            kind,
            arms: vec![ArmStats::default(); num_arms],
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn arms(&self) -> &[ArmStats] {
        &self.arms
    }

    pub fn total_pulls(&self) -> u64 {
        self.arms.iter().map(|a| a.pulls).sum()
    }

    /// Score of one arm. Consumes exactly one word from `rng`.
    fn score(&self, stats: &ArmStats, rng: &mut RngStream) -> f64 {
        let mut local = rng.child();
        match self.kind {
            PolicyKind::VanillaTs => {
                let (s, n) = (stats.successes, stats.pulls);
                sample_beta(s + 1, n - s + 1, &mut local)
            }
            PolicyKind::EpsTs(eps) => {
                let top = 1.0 - eps.get();
                let mean = stats.empirical_mean();
                if mean > top {
                    mean
                } else {
                    let (a, b) = posterior_params(stats.successes, stats.pulls, eps)
                        .expect("Beta branch precondition holds");
                    top * sample_beta(a, b, &mut local)
                }
            }
        }
    }

    /// Picks the arm with the highest score, breaking exact ties uniformly.
    pub fn select(&self, rng: &mut RngStream) -> usize {
        let mut best = f64::NEG_INFINITY;
        let mut ties: SmallVec<[usize; 8]> = SmallVec::new();
        for (arm, stats) in self.arms.iter().enumerate() {
            let theta = self.score(stats, rng);
            if theta > best {
                best = theta;
                ties.clear();
                ties.push(arm);
            } else if theta == best {
                ties.push(arm);
            }
        }
        let pick = rng.next_index(ties.len());
        ties[pick]
    }

    pub fn update(&mut self, arm: usize, reward: u8) -> Result<()> {
        let arms = self.arms.len();
        if reward > 1 {
            return Err(Error::NonBinaryReward(reward));
        }
        let stats = self
            .arms
            .get_mut(arm)
            .ok_or(Error::ArmOutOfRange { arm, arms })?;
        stats.pulls += 1;
        stats.successes += u64::from(reward);
        Ok(())
    }
}
