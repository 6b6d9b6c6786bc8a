//! Asymptotic regret coefficients, i.e. the limits of `R_f(T) / ln T`.
//!
//! All three coefficients sum `f(gap_a) / denominator_a` over the arms with
//! `gap_a > eps`; they differ only in the denominator:
//!
//! | coefficient | denominator |
//! |---|---|
//! | lower bound (any consistent policy) | `K_inf(mu_a, mu* + eps)` |
//! | epsilon-TS upper bound | `d(mu_a / (1-eps), mu* / (1-eps))` |
//! | TS / KL-UCB | `d(mu_a, mu*)` |
//!
//! Infinite denominators contribute nothing, which is how the constant-regret
//! regimes (`mu* + eps >= 1` for the lower bound, `mu* >= 1 - eps` for
//! epsilon-TS) come out as a zero coefficient.

use crate::env::{snap, BanditInstance};
use crate::error::{precondition, Error, Result};
use crate::gap::GapFunction;
use crate::kl::{bernoulli_kl, kinf_bernoulli, scaled_kl, ExtReal, Probability};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmTerm {
    pub arm: usize,
    pub mean: f64,
    pub gap: f64,
    pub f_gap: f64,
    pub denominator: ExtReal,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundReport {
    pub terms: Vec<ArmTerm>,
    pub total: f64,
}

fn build(
    instance: &BanditInstance,
    f: &GapFunction,
    eps: f64,
    mut denominator: impl FnMut(f64) -> Result<ExtReal>,
) -> Result<BoundReport> {
    let mut report = BoundReport::default();
    for (arm, (&mean, &gap)) in instance.means().iter().zip(instance.gaps()).enumerate() {
        if gap <= eps {
            continue;
        }
        let f_gap = f.evaluate(gap);
        let denominator = denominator(mean)?;
        let term = f_gap / denominator.get();
        report.total += term;
        report.terms.push(ArmTerm {
            arm,
            mean,
            gap,
            f_gap,
            denominator,
            term,
        });
    }
    Ok(report)
}

fn check_eps(eps: f64) -> Result<Probability> {
    let e = Probability::new(eps)?;
    if eps >= 1.0 {
        return Err(precondition("eps must be below 1"));
    }
    Ok(e)
}

/// Lower-bound coefficient for consistent policies on Bernoulli arms.
pub fn lower_bound_coefficient(
    instance: &BanditInstance,
    f: &GapFunction,
    eps: f64,
) -> Result<BoundReport> {
    Probability::new(eps)?;
    let threshold = snap(instance.mu_star() + eps);
    build(instance, f, eps, |mean| {
        Ok(kinf_bernoulli(Probability::new(mean)?, threshold))
    })
}

/// Upper-bound coefficient of epsilon-TS. Zero when `mu* >= 1 - eps`.
pub fn upper_bound_coefficient(
    instance: &BanditInstance,
    f: &GapFunction,
    eps: f64,
) -> Result<BoundReport> {
    let e = check_eps(eps)?;
    let constant_regime = instance.mu_star() >= snap(1.0 - eps);
    let mu_star = Probability::new(instance.mu_star())?;
    build(instance, f, eps, |mean| {
        if constant_regime {
            Ok(ExtReal::INFINITY)
        } else {
            scaled_kl(Probability::new(mean)?, mu_star, e)
        }
    })
}

/// Coefficient shared by vanilla TS and KL-UCB, restricted to gaps above `eps`.
pub fn standard_ts_coefficient(
    instance: &BanditInstance,
    f: &GapFunction,
    eps: f64,
) -> Result<BoundReport> {
    Probability::new(eps)?;
    let mu_star = Probability::new(instance.mu_star())?;
    build(instance, f, eps, |mean| {
        Ok(bernoulli_kl(Probability::new(mean)?, mu_star))
    })
}

/// TS coefficient over epsilon-TS coefficient; `+inf` when only the latter
/// vanishes.
pub fn bound_ratio(instance: &BanditInstance, f: &GapFunction, eps: f64) -> Result<ExtReal> {
    let standard = standard_ts_coefficient(instance, f, eps)?.total;
    let upper = upper_bound_coefficient(instance, f, eps)?.total;
    match (standard > 0.0, upper > 0.0) {
        (false, false) => Err(Error::UndefinedRatio),
        (true, false) => Ok(ExtReal::INFINITY),
        _ => ExtReal::new(standard / upper),
    }
}
