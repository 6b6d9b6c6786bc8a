//! Bernoulli KL divergence and the numeric utilities built on it.
//!
//! Divergences live in the extended non-negative reals: `d(p, q)` is `+inf`
//! whenever `p < 1` and `q >= 1`, or `p > 0` and `q = 0`. Infinity is the IEEE
//! value, so downstream ratios such as `f(gap) / d` collapse to `0` without
//! special casing.

use std::fmt;

use crate::error::{precondition, Error, Result};

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Self = Self(0.0);
    pub const ONE: Self = Self(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::InvalidProbability(value))
        }
    }

    #[inline]
    pub const fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A non-negative real or `+inf`. Never NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: Self = Self(0.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidExtReal(value))
        }
    }

    #[inline]
    pub const fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Signature shared by every Bernoulli KL implementation. The verification
/// suites are generic over it so a faulty divergence can be injected.
pub type KlFn = fn(Probability, Probability) -> ExtReal;

/// KL divergence `d(p, q)` between Bernoulli(p) and Bernoulli(q), in nats.
pub fn bernoulli_kl(p: Probability, q: Probability) -> ExtReal {
    let (p, q) = (p.get(), q.get());
    if p == q {
        return ExtReal::ZERO;
    }
    if (p < 1.0 && q >= 1.0) || (p > 0.0 && q <= 0.0) {
        return ExtReal::INFINITY;
    }
    let mut d = 0.0;
    if p > 0.0 {
        d += p * (p / q).ln();
    }
    if p < 1.0 {
        d += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    // Cancellation near p == q can leave a tiny negative residue.
    ExtReal(d.max(0.0))
}

/// `d(p / (1 - eps), q / (1 - eps))`, the divergence of the posteriors that
/// epsilon-TS samples from.
pub fn scaled_kl(p: Probability, q: Probability, eps: Probability) -> Result<ExtReal> {
    scaled_kl_with(bernoulli_kl, p, q, eps)
}

pub fn scaled_kl_with(
    kl: KlFn,
    p: Probability,
    q: Probability,
    eps: Probability,
) -> Result<ExtReal> {
    let scale = 1.0 - eps.get();
    if scale <= 0.0 {
        return Err(precondition(format!("eps = {eps} must be below 1")));
    }
    let ps = p.get() / scale;
    if ps > 1.0 {
        return Err(precondition(format!(
            "p / (1 - eps) = {ps} is not a probability"
        )));
    }
    let qs = q.get() / scale;
    if qs >= 1.0 {
        // The Bernoulli mean q/(1-eps) is out of reach of every scaled posterior.
        return Ok(if ps < 1.0 {
            ExtReal::INFINITY
        } else {
            ExtReal::ZERO
        });
    }
    Ok(kl(Probability(ps), Probability(qs)))
}

/// Bernoulli specialization of `K_inf(nu, x)`: the smallest divergence from a
/// Bernoulli(mu) arm to any bounded law with mean above `x`.
///
/// # Panics
///
/// If `x` is negative or NaN.
pub fn kinf_bernoulli(mu: Probability, x: f64) -> ExtReal {
    assert!(x >= 0.0, "K_inf threshold must be non-negative, got {x}");
    if x >= 1.0 {
        ExtReal::INFINITY
    } else {
        bernoulli_kl(mu, Probability(x))
    }
}

/// Absolute tolerance on the bracket width of [`kl_equation_solve`].
pub const KL_SOLVE_TOLERANCE: f64 = 1e-12;
const KL_SOLVE_MAX_ITER: usize = 200;

/// Finds `x` in `[p, q]` with
/// `d(x/(1-eps), q/(1-eps)) = d(p/(1-eps), q/(1-eps)) / (1 + c)`.
///
/// Requires `0 <= p < q < 1 - eps` and `c > 0`. The left side strictly
/// decreases in `x` on the bracket, so bisection converges to the unique root.
pub fn kl_equation_solve(
    p: Probability,
    q: Probability,
    eps: Probability,
    c: f64,
) -> Result<Probability> {
    kl_equation_solve_with(bernoulli_kl, p, q, eps, c)
}

pub fn kl_equation_solve_with(
    kl: KlFn,
    p: Probability,
    q: Probability,
    eps: Probability,
    c: f64,
) -> Result<Probability> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(precondition(format!("c = {c} must be positive and finite")));
    }
    if !(p < q && q.get() < 1.0 - eps.get()) {
        return Err(precondition(format!(
            "need 0 <= p < q < 1 - eps, got p = {p}, q = {q}, eps = {eps}"
        )));
    }
    let target = scaled_kl_with(kl, p, q, eps)?.get() / (1.0 + c);
    let excess = |x: f64| -> Result<f64> {
        Ok(scaled_kl_with(kl, Probability(x), q, eps)?.get() - target)
    };

    let (mut lo, mut hi) = (p.get(), q.get());
    for _ in 0..KL_SOLVE_MAX_ITER {
        if hi - lo <= KL_SOLVE_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Probability(0.5 * (lo + hi)))
}

/// Log pmf of Binomial(n, p) at `0..=n`, for `p` strictly inside (0, 1).
///
/// Uses the recurrence `f(j+1) = f(j) (n-j)/(j+1) p/(1-p)` in log space, which
/// stays free of underflow for `n` up to about 10^6.
fn binomial_log_pmf(n: u64, p: f64, upto: u64) -> impl Iterator<Item = f64> {
    let log_odds = p.ln() - (-p).ln_1p();
    let mut log_pmf = n as f64 * (-p).ln_1p();
    (0..=upto).map(move |j| {
        let current = log_pmf;
        if j < n {
            log_pmf += ((n - j) as f64 / (j + 1) as f64).ln() + log_odds;
        }
        current
    })
}

/// `ln(sum(exp(l)))`, shifted by the peak and Kahan-summed.
fn log_sum_exp(logs: &[f64]) -> f64 {
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &l in logs {
        let y = (l - peak).exp() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    peak + sum.ln()
}

/// Binomial(n, p) CDF at `k`: `P[X <= k]`.
pub fn binomial_cdf(n: u64, p: Probability, k: i64) -> Probability {
    if k < 0 {
        return Probability::ZERO;
    }
    let k = k as u64;
    if k >= n {
        return Probability::ONE;
    }
    let p = p.get();
    if p == 0.0 {
        return Probability::ONE;
    }
    if p == 1.0 {
        // All mass at n > k.
        return Probability::ZERO;
    }
    let logs: Vec<f64> = binomial_log_pmf(n, p, k).collect();
    Probability(log_sum_exp(&logs).exp().clamp(0.0, 1.0))
}

/// CDF of Beta(alpha, beta) at `x` for integer parameters, evaluated through
/// `F_Beta(alpha, beta; x) = 1 - F_Bin(alpha + beta - 1, x; alpha - 1)`.
///
/// Whichever Binomial tail is smaller is summed directly, so CDF values near 0
/// keep their relative accuracy.
///
/// # Panics
///
/// If either parameter is zero.
pub fn beta_cdf(alpha: u64, beta: u64, x: Probability) -> Probability {
    assert!(alpha >= 1 && beta >= 1, "Beta parameters must be >= 1");
    let x = x.get();
    if x == 0.0 {
        return Probability::ZERO;
    }
    if x == 1.0 {
        return Probability::ONE;
    }
    let n = alpha + beta - 1;
    if (alpha as f64) > n as f64 * x {
        // Upper tail is the smaller one: sum it directly.
        let logs: Vec<f64> = binomial_log_pmf(n, x, n).skip(alpha as usize).collect();
        Probability(log_sum_exp(&logs).exp().clamp(0.0, 1.0))
    } else {
        let lower = binomial_cdf(n, Probability(x), alpha as i64 - 1).get();
        Probability((1.0 - lower).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pr(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    // Reference values: closed form evaluated with 30-digit mpmath.
    const D_02_07: f64 = 0.534_110_808_710_307_39;
    const D_0_03: f64 = 0.356_674_943_938_732_38;
    const D_025_0625: f64 = 0.290_787_702_451_420_22;
    const D_06_08: f64 = 0.104_649_628_752_909_57;

    #[test]
    fn probability_rejects_out_of_range() {
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(1.0 + 1e-12).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert!(ExtReal::new(-1.0).is_err());
        assert!(ExtReal::new(f64::NAN).is_err());
        assert!(ExtReal::new(f64::INFINITY).unwrap().is_infinite());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(bernoulli_kl(pr(0.5), pr(0.5)), ExtReal::ZERO);
        assert!(bernoulli_kl(pr(0.5), pr(1.0)).is_infinite());
        assert!(bernoulli_kl(pr(0.3), pr(0.0)).is_infinite());
        assert_abs_diff_eq!(bernoulli_kl(pr(0.2), pr(0.7)).get(), D_02_07, epsilon = 1e-14);
        assert_abs_diff_eq!(bernoulli_kl(pr(0.0), pr(0.3)).get(), D_0_03, epsilon = 1e-14);
        assert_abs_diff_eq!(bernoulli_kl(pr(1.0), pr(0.5)).get(), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(bernoulli_kl(pr(1.0), pr(1.0)), ExtReal::ZERO);
        assert_eq!(bernoulli_kl(pr(0.0), pr(0.0)), ExtReal::ZERO);
    }

    #[test]
    fn scaled_kl_examples() {
        assert_eq!(scaled_kl(pr(0.3), pr(0.3), pr(0.2)).unwrap(), ExtReal::ZERO);
        assert!(scaled_kl(pr(0.6), pr(0.8), pr(0.2)).unwrap().is_infinite());
        assert_abs_diff_eq!(
            scaled_kl(pr(0.2), pr(0.5), pr(0.2)).unwrap().get(),
            D_025_0625,
            epsilon = 1e-14
        );
        assert!(scaled_kl(pr(0.9), pr(0.5), pr(0.2)).is_err());
        assert!(scaled_kl(pr(0.1), pr(0.5), pr(1.0)).is_err());
    }

    #[test]
    fn kinf_examples() {
        assert!(kinf_bernoulli(pr(0.6), 1.1).is_infinite());
        assert!(kinf_bernoulli(pr(0.6), 1.0).is_infinite());
        assert_eq!(kinf_bernoulli(pr(0.6), 0.6), ExtReal::ZERO);
        assert_abs_diff_eq!(kinf_bernoulli(pr(0.6), 0.8).get(), D_06_08, epsilon = 1e-14);
    }

    #[test]
    fn solve_limits_in_c() {
        let (p, q, eps) = (pr(0.2), pr(0.5), pr(0.2));
        let near_p = kl_equation_solve(p, q, eps, 1e-9).unwrap().get();
        let near_q = kl_equation_solve(p, q, eps, 1e9).unwrap().get();
        assert_abs_diff_eq!(near_p, 0.2, epsilon = 1e-6);
        assert_abs_diff_eq!(near_q, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn solve_half_divergence() {
        // 30-digit mpmath root of d(x/0.8, 0.625) = d(0.25, 0.625) / 2.
        let x = kl_equation_solve(pr(0.2), pr(0.5), pr(0.2), 1.0).unwrap();
        assert_abs_diff_eq!(x.get(), 0.286_620_089_121_235_37, epsilon = 1e-11);
        let lhs = scaled_kl(x, pr(0.5), pr(0.2)).unwrap().get();
        assert_abs_diff_eq!(lhs, D_025_0625 / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn solve_rejects_bad_input() {
        assert!(kl_equation_solve(pr(0.5), pr(0.5), pr(0.2), 1.0).is_err());
        assert!(kl_equation_solve(pr(0.2), pr(0.8), pr(0.2), 1.0).is_err());
        assert!(kl_equation_solve(pr(0.2), pr(0.5), pr(0.2), 0.0).is_err());
        assert!(kl_equation_solve(pr(0.2), pr(0.5), pr(0.2), f64::NAN).is_err());
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_cdf(5, pr(0.5), 5).get(), 1.0);
        assert_eq!(binomial_cdf(5, pr(0.5), -1).get(), 0.0);
        // 0.7^4 + 4 * 0.3 * 0.7^3 computed exactly over the rationals.
        assert_abs_diff_eq!(binomial_cdf(4, pr(0.3), 1).get(), 0.6517, epsilon = 1e-14);
        assert_eq!(binomial_cdf(4, pr(0.0), 0).get(), 1.0);
        assert_eq!(binomial_cdf(4, pr(1.0), 3).get(), 0.0);
        assert_eq!(binomial_cdf(0, pr(0.4), 0).get(), 1.0);
    }

    #[test]
    fn binomial_large_n_is_finite() {
        // Median of Binomial(10^6, 0.5) sits at 5e5; the CDF there is ~0.5.
        let v = binomial_cdf(1_000_000, pr(0.5), 500_000).get();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-3);
        let lo = binomial_cdf(1_000_000, pr(0.5), 499_000).get();
        assert!(lo < 0.03 && lo > 0.0);
    }

    #[test]
    fn beta_examples() {
        assert_abs_diff_eq!(beta_cdf(1, 1, pr(0.3)).get(), 0.3, epsilon = 1e-15);
        assert_eq!(beta_cdf(3, 4, pr(0.0)).get(), 0.0);
        assert_eq!(beta_cdf(3, 4, pr(1.0)).get(), 1.0);
        // Beta(2,3) density 12 x (1-x)^2 integrates to 12(x^2/2 - 2x^3/3 + x^4/4).
        let x: f64 = 0.5;
        let analytic = 12.0 * (x * x / 2.0 - 2.0 * x.powi(3) / 3.0 + x.powi(4) / 4.0);
        assert_abs_diff_eq!(analytic, 0.6875, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_cdf(2, 3, pr(0.5)).get(), 0.6875, epsilon = 1e-14);
        // Far-left tail keeps relative accuracy instead of cancelling to 0.
        for x in [0.254_761_629_412_030_73, 0.328_999_593_108_443_2, 0.05] {
            let reference = statrs::function::beta::beta_reg(35.0, 2.0, x);
            let got = beta_cdf(35, 2, pr(x)).get();
            assert!(((got - reference) / reference).abs() < 1e-10, "{x}: {got} vs {reference}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kl_monotone_in_q(p in 0.0f64..=1.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
                let p = pr(p);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assume!(hi - lo > 1e-6);
                let (dlo, dhi) = (bernoulli_kl(p, pr(lo)).get(), bernoulli_kl(p, pr(hi)).get());
                if lo >= p.get() {
                    prop_assert!(dlo < dhi || (dlo.is_infinite() && dhi.is_infinite()));
                } else if hi <= p.get() {
                    prop_assert!(dlo > dhi || (dlo.is_infinite() && dhi.is_infinite()));
                }
            }

            #[test]
            fn kl_self_is_zero(p in 0.0f64..=1.0) {
                prop_assert_eq!(bernoulli_kl(pr(p), pr(p)), ExtReal::ZERO);
            }

            #[test]
            fn beta_cdf_monotone(a in 1u64..40, b in 1u64..40, x in 0.0f64..1.0, y in 0.0f64..1.0) {
                let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                prop_assert!(beta_cdf(a, b, pr(lo)).get() <= beta_cdf(a, b, pr(hi)).get() + 1e-13);
            }

            #[test]
            fn solve_back_substitutes(
                eps in 0.0f64..0.45,
                p_frac in 0.0f64..1.0,
                q_frac in 0.01f64..0.999,
                c in 0.01f64..50.0,
            ) {
                let top = 1.0 - eps;
                let q = q_frac * top;
                let p = p_frac * q;
                prop_assume!(q - p > 1e-6);
                let (p, q, e) = (pr(p), pr(q), pr(eps));
                let x = kl_equation_solve(p, q, e, c).unwrap();
                prop_assert!(x >= p && x <= q);
                let lhs = scaled_kl(x, q, e).unwrap().get();
                let rhs = scaled_kl(p, q, e).unwrap().get() / (1.0 + c);
                prop_assert!((lhs - rhs).abs() <= 1e-9, "lhs {lhs} rhs {rhs}");
            }
        }
    }
}
