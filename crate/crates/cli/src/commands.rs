use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lenient_bandits::kl::{bernoulli_kl, KlFn};
use lenient_bandits::verify::{self, faulty_kl};
use lenient_bandits::{
    bound_ratio, default_checkpoints, lower_bound_coefficient, run_experiment,
    standard_ts_coefficient, upper_bound_coefficient, BanditInstance, BoundReport, Error,
    ExperimentConfig, ExperimentResult, GapFunction, PolicyKind, RewardKind,
};

use crate::config::{Config, Value};
use crate::CliError;

/// CSV cell for a real number; infinities and NaN use the literals `inf` and
/// `nan`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        x.to_string()
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn instance(config: &Config) -> Result<BanditInstance, CliError> {
    let means: Vec<f64> = config.require_list("means")?;
    let kind: RewardKind = config.scalar("kind")?.unwrap_or(RewardKind::Bernoulli);
    BanditInstance::new(means, kind).map_err(|e| config.invalid("means", e))
}

fn checkpoints(config: &Config, horizon: u64) -> Result<Vec<u64>, CliError> {
    match config.raw("checkpoints") {
        None => Ok(default_checkpoints(horizon)),
        Some(Value::Scalar(s)) if s == "default" => Ok(default_checkpoints(horizon)),
        Some(Value::Scalar(_)) => Err(config.invalid(
            "checkpoints",
            "expected `default` or a list of time steps",
        )),
        Some(Value::List(_)) => config.require_list("checkpoints"),
    }
}

/// Builds and validates the experiment described by `config`.
pub fn experiment_config(config: &Config) -> Result<ExperimentConfig, CliError> {
    let instance = instance(config)?;
    let policies: Vec<PolicyKind> = config.require_list("policies")?;
    let gap_functions: Vec<GapFunction> = config.require_list("gap_functions")?;
    let horizon: u64 = config.require("horizon")?;
    let n_seeds: u64 = config.require("seeds")?;
    let base_seed: u64 = config.scalar("seed")?.unwrap_or(0);
    if horizon == 0 {
        return Err(config.invalid("horizon", "must be positive"));
    }
    let experiment = ExperimentConfig {
        instance,
        policies,
        gap_functions,
        horizon,
        n_seeds,
        base_seed,
        checkpoints: checkpoints(config, horizon)?,
    };
    experiment
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(experiment)
}

pub fn simulate(
    config: &Config,
    out: &Path,
    threads: usize,
    per_seed: bool,
) -> Result<(), CliError> {
    let experiment = experiment_config(config)?;
    ensure_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let result = pool
        .install(|| run_experiment(&experiment))
        .map_err(|e| CliError::Config(e.to_string()))?;

    write_file(out, "curves.csv", &curves_csv(&result))?;
    write_file(out, "finals.csv", &finals_csv(&result))?;
    if per_seed {
        write_file(out, "per_seed.csv", &per_seed_csv(&result))?;
    }
    print!("{}", finals_table(&result));
    Ok(())
}

fn curves_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("policy,gap_function,checkpoint,mean_regret,std_regret\n");
    for cell in &result.cells {
        for p in &cell.curve {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                cell.policy,
                cell.gap_function,
                p.checkpoint,
                num(p.mean),
                num(p.std)
            );
        }
    }
    s
}

fn finals_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("policy,gap_function,mean,std,p99,max,n_seeds\n");
    for cell in &result.cells {
        let f = &cell.finals;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            cell.policy,
            cell.gap_function,
            num(f.mean),
            num(f.std),
            num(f.p99),
            num(f.max),
            result.n_seeds
        );
    }
    s
}

fn per_seed_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("seed,policy,gap_function,final_regret\n");
    for seed in 0..result.n_seeds as usize {
        for cell in &result.cells {
            let _ = writeln!(
                s,
                "{seed},{},{},{}",
                cell.policy,
                cell.gap_function,
                num(cell.per_seed[seed])
            );
        }
    }
    s
}

fn finals_table(result: &ExperimentResult) -> String {
    let mut s = format!(
        "{:<14} {:<16} {:>10} {:>10} {:>10} {:>10}\n",
        "policy", "gap_function", "mean", "std", "p99", "max"
    );
    for cell in &result.cells {
        let f = &cell.finals;
        let _ = writeln!(
            s,
            "{:<14} {:<16} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            cell.policy.to_string(),
            cell.gap_function.to_string(),
            f.mean,
            f.std,
            f.p99,
            f.max
        );
    }
    let _ = writeln!(s, "({} seeds)", result.n_seeds);
    s
}

pub fn bounds(config: &Config, out: &Path) -> Result<(), CliError> {
    let instance = instance(config)?;
    if instance.kind() != RewardKind::Bernoulli {
        return Err(config.invalid("kind", "bound coefficients need Bernoulli arms"));
    }
    let eps: f64 = config.require("eps")?;
    let f: GapFunction = config.require("gap_function")?;
    let reports = [
        ("lower", lower_bound_coefficient(&instance, &f, eps)),
        ("upper", upper_bound_coefficient(&instance, &f, eps)),
        ("standard", standard_ts_coefficient(&instance, &f, eps)),
    ];
    ensure_dir(out)?;
    for (name, report) in reports {
        let report = report.map_err(|e| config.invalid("eps", e))?;
        write_file(out, &format!("bounds_{name}.csv"), &bounds_csv(&report))?;
        println!("{name:<9} {}", num(report.total));
    }
    Ok(())
}

fn bounds_csv(report: &BoundReport) -> String {
    let mut s = String::from("arm,mean,gap,f_gap,denominator,term\n");
    for t in &report.terms {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            t.arm,
            num(t.mean),
            num(t.gap),
            num(t.f_gap),
            num(t.denominator.get()),
            num(t.term)
        );
    }
    let _ = writeln!(s, "total,,,,,{}", num(report.total));
    s
}

/// Rounds a sweep point to 12 decimals so that e.g. `0.1 * 8` lands on `0.8`.
fn grid_point(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn mu1_grid(config: &Config) -> Result<Vec<f64>, CliError> {
    match (config.list::<f64>("mu1_grid")?, config.list::<f64>("mu1_range")?) {
        (Some(_), Some(_)) => Err(config.invalid("mu1_range", "give either mu1_grid or mu1_range")),
        (Some(grid), None) => Ok(grid.into_iter().map(grid_point).collect()),
        (None, Some(range)) => {
            let &[start, stop, step] = range.as_slice() else {
                return Err(config.invalid("mu1_range", "expected [start, stop, step]"));
            };
            if !(step > 0.0) || !(stop >= start) {
                return Err(config.invalid("mu1_range", "need step > 0 and stop >= start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as u64;
            Ok((0..=n).map(|i| grid_point(start + i as f64 * step)).collect())
        }
        (None, None) => Err(CliError::Config(
            "missing required key `mu1_grid` (or `mu1_range`)".to_owned(),
        )),
    }
}

pub fn ratio(config: &Config, out: &Path, allow_degenerate: bool) -> Result<(), CliError> {
    let mu2: f64 = config.require("mu2")?;
    let eps: f64 = config.require("eps")?;
    let f: GapFunction = config.require("gap_function")?;
    let grid = mu1_grid(config)?;
    let mut s = String::from("mu1,ratio\n");
    for mu1 in grid {
        let instance =
            BanditInstance::bernoulli(vec![mu1, mu2]).map_err(|e| config.invalid("mu1_grid", e))?;
        // With mu1 below mu2 the second arm is optimal and arm 1's gap is 0.
        let degenerate = instance.gap_of(1).map_or(true, |gap| gap <= eps);
        let value = if degenerate {
            None
        } else {
            match bound_ratio(&instance, &f, eps) {
                Ok(r) => Some(r.get()),
                Err(Error::UndefinedRatio) => None,
                Err(e) => return Err(config.invalid("eps", e)),
            }
        };
        match value {
            Some(r) => {
                let _ = writeln!(s, "{},{}", num(mu1), num(r));
            }
            None if allow_degenerate => {
                let _ = writeln!(s, "{},nan", num(mu1));
            }
            None => {
                return Err(CliError::Config(format!(
                    "ratio undefined at mu1 = {mu1}: needs mu1 > mu2 + eps = {} and a \
                     positive coefficient (pass --allow-degenerate to write nan)",
                    mu2 + eps
                )));
            }
        }
    }
    ensure_dir(out)?;
    write_file(out, "ratio.csv", &s)?;
    print!("{s}");
    Ok(())
}

/// Runs the property suites; returns whether all passed.
pub fn verify(density: u32, inject_kl_fault: bool) -> bool {
    let kl: KlFn = if inject_kl_fault { faulty_kl } else { bernoulli_kl };
    let mut all = true;
    for check in verify::run_all(kl, density) {
        println!("{check}");
        all &= check.passed();
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_literals() {
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(5.0), "5");
    }

    #[test]
    fn range_grid_hits_decimals() {
        let c = Config::parse("t", "mu1_range = [0.5, 0.9, 0.1]\n").unwrap();
        assert_eq!(mu1_grid(&c).unwrap(), vec![0.5, 0.6, 0.7, 0.8, 0.9]);
        let c = Config::parse("t", "mu1_range = [0.5, 0.9, 0]\n").unwrap();
        assert!(mu1_grid(&c).is_err());
    }

    #[test]
    fn checkpoints_default_keyword() {
        let c = Config::parse("t", "checkpoints = default\n").unwrap();
        assert_eq!(checkpoints(&c, 100).unwrap(), default_checkpoints(100));
        let c = Config::parse("t", "checkpoints = [10, 100]\n").unwrap();
        assert_eq!(checkpoints(&c, 100).unwrap(), vec![10, 100]);
    }
}
