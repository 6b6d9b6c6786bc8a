//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p lenient-bandits --test acceptance -- --nocapture` to see them.
//!
//! Table targets are the published 50,000-seed statistics at T = 5000 with
//! eps = 0.2; tolerances are roughly 3.5 standard errors at 5,000 seeds.

use std::sync::OnceLock;

use lenient_bandits::bounds::{
    bound_ratio, lower_bound_coefficient, standard_ts_coefficient, upper_bound_coefficient,
};
use lenient_bandits::kl::bernoulli_kl;
use lenient_bandits::verify;
use lenient_bandits::{
    default_checkpoints, run_experiment, BanditInstance, ExperimentConfig, ExperimentResult,
    GapFunction, PolicyKind, PolicyState, RngStream,
};

const EPS: f64 = 0.2;
const HORIZON: u64 = 5000;
const SEEDS: u64 = 5000;
const BASE_SEED: u64 = 1;

fn report(name: &str, ok: bool, detail: impl AsRef<str>) {
    println!("[{}] {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
}

fn table_config(means: &[f64]) -> ExperimentConfig {
    let mut checkpoints = default_checkpoints(HORIZON);
    checkpoints.push(HORIZON / 2);
    checkpoints.sort_unstable();
    checkpoints.dedup();
    ExperimentConfig {
        instance: BanditInstance::bernoulli(means.to_vec()).unwrap(),
        policies: vec![PolicyKind::VanillaTs, PolicyKind::eps_ts(EPS).unwrap()],
        gap_functions: vec![GapFunction::Standard, GapFunction::hinge(EPS).unwrap()],
        horizon: HORIZON,
        n_seeds: SEEDS,
        base_seed: BASE_SEED,
        checkpoints,
    }
}

fn run_cached(cell: &'static OnceLock<ExperimentResult>, means: &[f64]) -> &'static ExperimentResult {
    cell.get_or_init(|| run_experiment(&table_config(means)).unwrap())
}

fn high_opt() -> &'static ExperimentResult {
    static CELL: OnceLock<ExperimentResult> = OnceLock::new();
    run_cached(&CELL, &[0.9, 0.6])
}

fn low_opt() -> &'static ExperimentResult {
    static CELL: OnceLock<ExperimentResult> = OnceLock::new();
    run_cached(&CELL, &[0.5, 0.2])
}

fn high_opt_mid_arm() -> &'static ExperimentResult {
    static CELL: OnceLock<ExperimentResult> = OnceLock::new();
    run_cached(&CELL, &[0.9, 0.85, 0.6])
}

struct Target {
    policy: PolicyKind,
    gap: GapFunction,
    mean: f64,
    tol: f64,
}

fn target(policy: &str, gap: &str, mean: f64, tol: f64) -> Target {
    Target {
        policy: policy.parse().unwrap(),
        gap: gap.parse().unwrap(),
        mean,
        tol,
    }
}

fn check_table(label: &str, result: &ExperimentResult, targets: &[Target]) {
    let mut all = true;
    for t in targets {
        let cell = result.cell(&t.policy, &t.gap).unwrap();
        let got = cell.finals.mean;
        let ok = (got - t.mean).abs() <= t.tol;
        all &= ok;
        report(
            &format!("{label} {} {}", t.policy, t.gap),
            ok,
            format!(
                "mean {got:.3} (target {} +- {}), std {:.2}, p99 {:.2}, max {:.2}, {} seeds",
                t.mean, t.tol, cell.finals.std, cell.finals.p99, cell.finals.max, result.n_seeds
            ),
        );
    }
    assert!(all, "{label}: table statistics out of tolerance");
}

#[test]
fn table_high_optimal_arm() {
    check_table(
        "table mu=(0.9,0.6)",
        high_opt(),
        &[
            target("ts", "standard", 5.01, 0.25),
            target("eps-ts:0.2", "standard", 2.16, 0.45),
            target("ts", "hinge:0.2", 1.67, 0.1),
            target("eps-ts:0.2", "hinge:0.2", 0.72, 0.15),
        ],
    );
}

#[test]
fn table_low_optimal_arm() {
    check_table(
        "table mu=(0.5,0.2)",
        low_opt(),
        &[
            target("ts", "standard", 8.26, 0.3),
            target("eps-ts:0.2", "standard", 5.5, 0.3),
            target("ts", "hinge:0.2", 2.75, 0.1),
            target("eps-ts:0.2", "hinge:0.2", 1.83, 0.1),
        ],
    );
}

#[test]
fn table_high_optimal_near_arm() {
    check_table(
        "table mu=(0.9,0.85,0.6)",
        high_opt_mid_arm(),
        &[
            target("eps-ts:0.2", "standard", 94.53, 6.0),
            target("eps-ts:0.2", "hinge:0.2", 0.33, 0.1),
            target("ts", "hinge:0.2", 1.6, 0.1),
        ],
    );
}

#[test]
fn constant_regret_regime() {
    let result = high_opt();
    let hinge = GapFunction::hinge(EPS).unwrap();
    let increment = |policy: PolicyKind| {
        let curve = &result.cell(&policy, &hinge).unwrap().curve;
        let at = |t: u64| curve.iter().find(|p| p.checkpoint == t).unwrap().mean;
        at(HORIZON) - at(HORIZON / 2)
    };
    let eps_ts = increment(PolicyKind::eps_ts(EPS).unwrap());
    let ts = increment(PolicyKind::VanillaTs);
    let ok = eps_ts < 0.1 * ts;
    report(
        "constant lenient regret when mu* > 1 - eps",
        ok,
        format!(
            "hinge increment over [2500, 5000]: eps-TS {eps_ts:.4}, TS {ts:.4} (limit {:.4})",
            0.1 * ts
        ),
    );
    assert!(ok);
}

#[test]
fn zero_eps_recovers_thompson_sampling() {
    let mut gen = RngStream::new(0xACCE, 0);
    let mut mismatches = 0;
    for instance_idx in 0..100u64 {
        let k = 2 + gen.next_index(4);
        let means: Vec<f64> = (0..k).map(|_| gen.next_f64()).collect();
        let instance = BanditInstance::bernoulli(means).unwrap();
        let actions = |kind: PolicyKind| {
            let mut state = PolicyState::new(kind, k);
            let mut policy_rng = RngStream::new(instance_idx, 1);
            let mut env_rng = RngStream::new(instance_idx, 0);
            (0..1000)
                .map(|_| {
                    let arm = state.select(&mut policy_rng);
                    let r = instance.pull(arm, &mut env_rng).unwrap();
                    state.update(arm, r).unwrap();
                    arm
                })
                .collect::<Vec<_>>()
        };
        if actions(PolicyKind::eps_ts(0.0).unwrap()) != actions(PolicyKind::VanillaTs) {
            mismatches += 1;
        }
    }
    report(
        "eps = 0 reproduces vanilla TS",
        mismatches == 0,
        format!("{mismatches} of 100 instances differ (T = 1000)"),
    );
    assert_eq!(mismatches, 0);
}

fn check_property(label: &str, check: verify::PropertyCheck, min_points: u64) {
    let ok = check.passed() && check.checked >= min_points;
    report(label, ok, check.to_string());
    assert!(ok, "{check}");
}

#[test]
fn scaled_kl_lower_bound_grid() {
    check_property(
        "scaled KL >= d(p, q + eps) / (4(1 - eps))",
        verify::scaled_kl_lower_bound(bernoulli_kl, verify::DEFAULT_GRID_DENSITY),
        10_000,
    );
}

#[test]
fn kl_equation_solution_grid() {
    check_property(
        "KL-equation solution convexity bound",
        verify::kl_solution_convexity(bernoulli_kl, verify::DEFAULT_GRID_DENSITY),
        1_000,
    );
    check_property(
        "KL-equation solution monotone in q",
        verify::kl_solution_monotone(bernoulli_kl, verify::DEFAULT_GRID_DENSITY),
        1_000,
    );
}

#[test]
fn beta_binomial_identity() {
    let check = verify::beta_binomial_identity(verify::DEFAULT_GRID_DENSITY);
    let ok = check.passed() && check.worst < 1e-10;
    report("Beta-Binomial identity", ok, check.to_string());
    assert!(ok);
}

#[test]
fn regret_integral_identity() {
    check_property(
        "standard regret = integral over eps of indicator regret",
        verify::regret_integral_identity(100, 0xC1A1),
        100,
    );
}

#[test]
fn bound_ordering_and_ratio_shape() {
    let mut checked = 0;
    let mut violations = Vec::new();
    for eps_pct in [5u32, 10, 20, 30] {
        let eps = f64::from(eps_pct) / 100.0;
        for i1 in 1..20u32 {
            for i2 in 0..i1 {
                let (mu1, mu2) = (f64::from(i1) / 20.0, f64::from(i2) / 20.0);
                if mu1 - mu2 <= eps + 1e-9 {
                    continue;
                }
                let instance = BanditInstance::bernoulli(vec![mu1, mu2]).unwrap();
                for f in [
                    GapFunction::hinge(eps).unwrap(),
                    GapFunction::indicator(eps).unwrap(),
                    GapFunction::thresholded(eps).unwrap(),
                ] {
                    let up = upper_bound_coefficient(&instance, &f, eps).unwrap().total;
                    let st = standard_ts_coefficient(&instance, &f, eps).unwrap().total;
                    checked += 1;
                    if up > st * (1.0 + 1e-12) {
                        violations.push(format!("upper > standard at {mu1},{mu2},{f}"));
                    }
                    if mu1 < 1.0 - eps && mu2 < 1.0 - 2.0 * eps {
                        let lo = lower_bound_coefficient(&instance, &f, eps).unwrap().total;
                        checked += 1;
                        if up > 4.0 * (1.0 - eps) * lo * (1.0 + 1e-12) {
                            violations.push(format!("upper > 4(1-eps) lower at {mu1},{mu2},{f}"));
                        }
                    }
                }
            }
        }
    }
    report(
        "upper <= standard and upper <= 4(1-eps) lower",
        violations.is_empty(),
        format!("{checked} comparisons, {} violations", violations.len()),
    );

    // Ratio grows without bound as mu1 approaches 1 - eps and is infinite there.
    let f = GapFunction::indicator(EPS).unwrap();
    let ratios: Vec<f64> = [0.6, 0.7, 0.75, 0.79, 0.799, 0.7999, 0.8, 0.9]
        .iter()
        .map(|&mu1| {
            let instance = BanditInstance::bernoulli(vec![mu1, 0.3]).unwrap();
            bound_ratio(&instance, &f, EPS).unwrap().get()
        })
        .collect();
    let finite = &ratios[..6];
    let shape_ok = finite.windows(2).all(|w| w[0] < w[1])
        && finite.iter().all(|r| r.is_finite() && *r > 1.0)
        && ratios[6].is_infinite()
        && ratios[7].is_infinite();
    report(
        "TS / eps-TS bound ratio blows up at mu1 = 1 - eps",
        shape_ok,
        format!("mu2 = 0.3, ratios {ratios:?}"),
    );
    assert!(violations.is_empty(), "{violations:?}");
    assert!(shape_ok);
}
