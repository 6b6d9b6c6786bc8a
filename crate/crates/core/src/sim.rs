//! Monte-Carlo experiment runner.
//!
//! Replicate `i` of an experiment is keyed by `derive_seed(base_seed, i)`.
//! Under that key, every policy reads rewards from the same environment
//! stream (id [`ENV_STREAM`]) and samples posteriors from its own stream
//! (id `POLICY_STREAM_BASE + policy_index`). Results therefore depend only on
//! the config, never on how seeds are scheduled across threads.

use rayon::prelude::*;

use crate::env::BanditInstance;
use crate::error::{Error, Result};
use crate::gap::GapFunction;
use crate::policy::{PolicyKind, PolicyState};
use crate::rng::{derive_seed, RngStream};

pub const ENV_STREAM: u64 = 0;
pub const POLICY_STREAM_BASE: u64 = 1;

/// Number of log-spaced points in [`default_checkpoints`], before adding `T`.
pub const DEFAULT_CHECKPOINTS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: BanditInstance,
    pub policies: Vec<PolicyKind>,
    pub gap_functions: Vec<GapFunction>,
    pub horizon: u64,
    pub n_seeds: u64,
    pub base_seed: u64,
    pub checkpoints: Vec<u64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.policies.is_empty() {
            return bad("at least one policy is required");
        }
        if self.gap_functions.is_empty() {
            return bad("at least one gap function is required");
        }
        if self.horizon == 0 {
            return bad("horizon must be positive");
        }
        if self.n_seeds == 0 {
            return bad("at least one seed is required");
        }
        if self.checkpoints.first().is_none_or(|&c| c == 0) {
            return bad("checkpoints must be non-empty and start at 1 or later");
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be strictly increasing");
        }
        if self.checkpoints.last() != Some(&self.horizon) {
            return bad("the last checkpoint must equal the horizon");
        }
        Ok(())
    }

    fn cell(&self, policy: usize, gap: usize) -> usize {
        policy * self.gap_functions.len() + gap
    }
}

/// `DEFAULT_CHECKPOINTS` log-spaced integer times in `[1, T]`, deduplicated,
/// always ending at `T`.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    assert!(horizon >= 1);
    let log_t = (horizon as f64).ln();
    let last = (DEFAULT_CHECKPOINTS - 1) as f64;
    let mut points: Vec<u64> = (0..DEFAULT_CHECKPOINTS)
        .map(|i| ((i as f64 / last * log_t).exp().round() as u64).clamp(1, horizon))
        .collect();
    points.push(horizon);
    points.sort_unstable();
    points.dedup();
    points
}

/// Cumulative lenient regret of one replicate, for every (policy, gap
/// function) cell at every checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub seed_index: u64,
    n_checkpoints: usize,
    /// Row-major `[cell][checkpoint]`.
    values: Vec<f64>,
}

impl SeedResult {
    pub fn curve(&self, cell: usize) -> &[f64] {
        let start = cell * self.n_checkpoints;
        &self.values[start..start + self.n_checkpoints]
    }

    pub fn final_value(&self, cell: usize) -> f64 {
        *self.curve(cell).last().expect("at least one checkpoint")
    }
}

/// Runs every configured policy for one replicate.
pub fn run_single(config: &ExperimentConfig, seed_index: u64) -> Result<SeedResult> {
    if seed_index >= config.n_seeds {
        return Err(Error::InvalidConfig(format!(
            "seed index {seed_index} out of range for {} seeds",
            config.n_seeds
        )));
    }
    let instance = &config.instance;
    let k = instance.num_arms();
    let key = derive_seed(config.base_seed, seed_index);

    // f(gap_a) for every gap function and arm.
    let costs: Vec<Vec<f64>> = config
        .gap_functions
        .iter()
        .map(|f| instance.gaps().iter().map(|&g| f.evaluate(g)).collect())
        .collect();

    let n_cp = config.checkpoints.len();
    let mut values = vec![0.0; config.policies.len() * costs.len() * n_cp];

    for (p, &kind) in config.policies.iter().enumerate() {
        let mut state = PolicyState::new(kind, k);
        let mut env_rng = RngStream::new(key, ENV_STREAM);
        let mut policy_rng = RngStream::new(key, POLICY_STREAM_BASE + p as u64);
        let mut next = 0;
        for t in 1..=config.horizon {
            let arm = state.select(&mut policy_rng);
            let reward = instance.pull(arm, &mut env_rng)?;
            state.update(arm, reward)?;
            if t == config.checkpoints[next] {
                for (g, cost) in costs.iter().enumerate() {
                    let regret: f64 = state
                        .arms()
                        .iter()
                        .zip(cost)
                        .map(|(a, c)| a.pulls as f64 * c)
                        .sum();
                    values[config.cell(p, g) * n_cp + next] = regret;
                }
                next += 1;
            }
        }
    }
    Ok(SeedResult {
        seed_index,
        n_checkpoints: n_cp,
        values,
    })
}

/// Summary of a sample of final regrets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateStats {
    pub mean: f64,
    /// Population standard deviation (divisor `n`).
    pub std: f64,
    /// Nearest-rank 99th percentile.
    pub p99: f64,
    pub max: f64,
}

pub fn aggregate(values: &[f64]) -> Result<AggregateStats> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let (mean, std) = mean_std(values);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.99 * sorted.len() as f64).ceil() as usize).max(1);
    Ok(AggregateStats {
        mean,
        std,
        p99: sorted[rank - 1],
        max: sorted[sorted.len() - 1],
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub checkpoint: u64,
    pub mean: f64,
    pub std: f64,
}

/// Aggregated results for one (policy, gap function) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub policy: PolicyKind,
    pub gap_function: GapFunction,
    pub finals: AggregateStats,
    pub curve: Vec<CurvePoint>,
    /// Final regret of every replicate, in seed order.
    pub per_seed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub n_seeds: u64,
    pub cells: Vec<CellSummary>,
}

impl ExperimentResult {
    pub fn cell(&self, policy: &PolicyKind, gap_function: &GapFunction) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| &c.policy == policy && &c.gap_function == gap_function)
    }
}

/// Runs all replicates on the current rayon pool and aggregates them.
///
/// Replicates are collected in seed order before any reduction, so the
/// output is bitwise identical for every thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let seeds: Vec<SeedResult> = (0..config.n_seeds)
        .into_par_iter()
        .map(|i| run_single(config, i))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (p, &policy) in config.policies.iter().enumerate() {
        for (g, &gap_function) in config.gap_functions.iter().enumerate() {
            let cell = config.cell(p, g);
            let curve = config
                .checkpoints
                .iter()
                .enumerate()
                .map(|(j, &checkpoint)| {
                    let column: Vec<f64> = seeds.iter().map(|s| s.curve(cell)[j]).collect();
                    let (mean, std) = mean_std(&column);
                    CurvePoint {
                        checkpoint,
                        mean,
                        std,
                    }
                })
                .collect();
            let per_seed: Vec<f64> = seeds.iter().map(|s| s.final_value(cell)).collect();
            cells.push(CellSummary {
                policy,
                gap_function,
                finals: aggregate(&per_seed)?,
                curve,
                per_seed,
            });
        }
    }
    Ok(ExperimentResult {
        n_seeds: config.n_seeds,
        cells,
    })
}
