//! Stochastic multi-armed bandits under lenient regret.
//!
//! * [`kl`]: Bernoulli KL divergence with its infinity conventions, the scaled
//!   divergence used by epsilon-TS, KL-equation root finding, and
//!   Beta/Binomial CDFs.
//! * [`gap`]: epsilon-gap functions and per-trajectory lenient regret.
//! * [`env`]: Bernoulli and randomly-rounded bounded environments.
//! * [`policy`]: Thompson Sampling and epsilon-TS.
//! * [`bounds`]: asymptotic lower/upper regret coefficients.
//! * [`sim`]: the parallel, seed-reproducible Monte-Carlo harness.
//! * [`verify`]: grid property suites backing the `verify` command.

pub mod bounds;
pub mod env;
pub mod error;
pub mod gap;
pub mod kl;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod verify;

pub use bounds::{
    bound_ratio, lower_bound_coefficient, standard_ts_coefficient, upper_bound_coefficient,
    ArmTerm, BoundReport,
};
pub use env::{BanditInstance, BoundedLaw, RewardKind};
pub use error::{Error, Result};
pub use gap::{trajectory_regret, GapFunction};
pub use kl::{
    bernoulli_kl, beta_cdf, binomial_cdf, kinf_bernoulli, kl_equation_solve, scaled_kl, ExtReal,
    Probability,
};
pub use policy::{posterior_params, ArmStats, PolicyKind, PolicyState};
pub use rng::RngStream;
pub use sim::{
    aggregate, default_checkpoints, run_experiment, run_single, AggregateStats, CellSummary,
    CurvePoint, ExperimentConfig, ExperimentResult, SeedResult,
};
