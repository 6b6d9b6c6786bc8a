//! Grid-based property suites for the KL machinery and the regret identities.
//!
//! Each suite walks a deterministic grid, counts violations and reports the
//! worst deviation it saw. The suites are parameterized by the Bernoulli KL
//! implementation so a deliberately broken one can be checked to fail.

use std::fmt;

use statrs::function::beta::beta_reg;

use crate::gap::{trajectory_regret, GapFunction};
use crate::kl::{
    bernoulli_kl, beta_cdf, kl_equation_solve_with, scaled_kl_with, ExtReal, KlFn, Probability,
    KL_SOLVE_TOLERANCE,
};
use crate::rng::RngStream;

/// Grid resolution used when none is given: 0.01 steps.
pub const DEFAULT_GRID_DENSITY: u32 = 100;

/// Tolerance for the incomplete-Beta comparison.
pub const BETA_BINOMIAL_TOLERANCE: f64 = 1e-10;

/// Tolerance for the exact regret integral.
pub const INTEGRAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub checked: u64,
    pub violations: u64,
    /// Largest amount by which any point missed (or, for equalities, the
    /// largest absolute deviation seen).
    pub worst: f64,
}

impl PropertyCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            violations: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, ok: bool, deviation: f64) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
        }
        if deviation > self.worst {
            self.worst = deviation;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} points, {} violations, worst {:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.violations,
            self.worst
        )
    }
}

fn grid(i: u32, density: u32) -> Probability {
    Probability::new(f64::from(i) / f64::from(density)).expect("grid point in [0, 1]")
}

/// `d(p/(1-e), q/(1-e)) >= d(p, q+e) / (4(1-e))` for `e in [0, 1/2)`,
/// `p in [0, 1-2e)`, `q in [p+e, 1-e)`.
pub fn scaled_kl_lower_bound(kl: KlFn, density: u32) -> PropertyCheck {
    let mut check = PropertyCheck::new("scaled-kl lower bound");
    let n = density;
    for ie in (0..n).take_while(|&ie| 2 * ie < n) {
        let e = grid(ie, n);
        for ip in (0..n).take_while(|&ip| ip + 2 * ie < n) {
            let p = grid(ip, n);
            for iq in (ip + ie)..(n - ie) {
                let q = grid(iq, n);
                let shifted = grid(iq + ie, n);
                let lhs = scaled_kl_with(kl, p, q, e).expect("grid inside domain").get();
                let rhs = kl(p, shifted).get() / (4.0 * (1.0 - e.get()));
                let slack = 1e-12 * rhs.max(1.0);
                check.record(lhs >= rhs - slack, rhs - lhs);
            }
        }
    }
    check
}

const SOLVE_EPS: [u32; 5] = [0, 10, 20, 30, 40];
const SOLVE_C: [f64; 5] = [0.1, 0.5, 1.0, 3.0, 10.0];

/// Solutions `x_c(p, q)` of the scaled KL equation obey
/// `x_c(p, q) <= (c q + p) / (1 + c)`.
pub fn kl_solution_convexity(kl: KlFn, density: u32) -> PropertyCheck {
    let mut check = PropertyCheck::new("kl-equation convexity bound");
    for_each_solution_row(kl, density, |p, qs, c, xs| {
        for (&q, &x) in qs.iter().zip(xs) {
            let bound = (c * q + p) / (1.0 + c);
            check.record(x <= bound + KL_SOLVE_TOLERANCE, x - bound);
        }
    });
    check
}

/// `x_c(p, q) <= x_c(p, mu)` whenever `q <= mu < 1 - eps`.
pub fn kl_solution_monotone(kl: KlFn, density: u32) -> PropertyCheck {
    let mut check = PropertyCheck::new("kl-equation monotone in q");
    for_each_solution_row(kl, density, |_, _, _, xs| {
        for (i, &x) in xs.iter().enumerate() {
            for &y in &xs[i..] {
                check.record(x <= y + KL_SOLVE_TOLERANCE, x - y);
            }
        }
    });
    check
}

/// Calls `visit(p, qs, c, xs)` with all grid `q > p` below `1 - eps` (in
/// increasing order) and their solutions, for every `(eps, p, c)` row.
fn for_each_solution_row(kl: KlFn, density: u32, mut visit: impl FnMut(f64, &[f64], f64, &[f64])) {
    // Coarser than the density: each row costs one bisection per q.
    let n = (density / 4).max(5);
    for eps_pct in SOLVE_EPS {
        let e = Probability::new(f64::from(eps_pct) / 100.0).expect("eps in [0, 1)");
        let top = 1.0 - e.get();
        for ip in 0..n {
            let p = grid(ip, n);
            let qs: Vec<Probability> = ((ip + 1)..n)
                .map(|iq| grid(iq, n))
                .filter(|q| q.get() < top)
                .collect();
            if qs.is_empty() {
                continue;
            }
            let q_vals: Vec<f64> = qs.iter().map(|q| q.get()).collect();
            for c in SOLVE_C {
                let xs: Vec<f64> = qs
                    .iter()
                    .map(|&q| {
                        kl_equation_solve_with(kl, p, q, e, c)
                            .expect("grid satisfies solver preconditions")
                            .get()
                    })
                    .collect();
                visit(p.get(), &q_vals, c, &xs);
            }
        }
    }
}

/// `F_Beta(a, b; x) = 1 - F_Bin(a + b - 1, x; a - 1)` against an independent
/// continued-fraction evaluation of the regularized incomplete Beta function,
/// for integer `a, b` in `1..=50`.
pub fn beta_binomial_identity(density: u32) -> PropertyCheck {
    let mut check = PropertyCheck::new("beta-binomial identity");
    for a in 1..=50u64 {
        for b in 1..=50u64 {
            for ix in 0..=density {
                let x = grid(ix, density);
                let via_binomial = beta_cdf(a, b, x).get();
                let reference = beta_reg(a as f64, b as f64, x.get());
                let dev = (via_binomial - reference).abs();
                check.record(dev < BETA_BINOMIAL_TOLERANCE, dev);
            }
        }
    }
    check
}

/// Exact integral over `eps in [0, 1]` of the indicator regret of `gaps`.
///
/// The integrand counts gaps above `eps`, which is constant between
/// consecutive distinct gap values, so a midpoint rule on those pieces is
/// exact.
pub fn integrated_indicator_regret(gaps: &[f64]) -> f64 {
    let mut breaks: Vec<f64> = gaps.to_vec();
    breaks.push(0.0);
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| {
            let mid = Probability::new(0.5 * (w[0] + w[1])).expect("midpoint in [0, 1]");
            (w[1] - w[0]) * trajectory_regret(&GapFunction::Indicator(mid), gaps)
        })
        .sum()
}

/// Standard regret equals the integral of indicator regrets over the leniency,
/// on random trajectories.
pub fn regret_integral_identity(trajectories: usize, seed: u64) -> PropertyCheck {
    let mut check = PropertyCheck::new("standard regret = integral of indicator regrets");
    let mut rng = RngStream::new(seed, 0);
    // A few fixed gap levels make ties and exact zeros common.
    let levels = [0.0, 0.05, 0.2, 0.3, 0.5, 1.0];
    for _ in 0..trajectories {
        let len = 1 + rng.next_index(200);
        let gaps: Vec<f64> = (0..len)
            .map(|_| {
                if rng.next_f64() < 0.5 {
                    levels[rng.next_index(levels.len())]
                } else {
                    rng.next_f64()
                }
            })
            .collect();
        let standard = trajectory_regret(&GapFunction::Standard, &gaps);
        let integral = integrated_indicator_regret(&gaps);
        let dev = (standard - integral).abs();
        check.record(dev <= INTEGRAL_TOLERANCE, dev);
    }
    check
}

/// Squared divergence; breaks the scaled-KL lower bound. Used to show that the
/// suites detect a faulty KL.
pub fn faulty_kl(p: Probability, q: Probability) -> ExtReal {
    let d = bernoulli_kl(p, q).get();
    ExtReal::new(d * d).expect("square of a non-negative value")
}

/// Runs every suite.
pub fn run_all(kl: KlFn, density: u32) -> Vec<PropertyCheck> {
    vec![
        scaled_kl_lower_bound(kl, density),
        kl_solution_convexity(kl, density),
        kl_solution_monotone(kl, density),
        beta_binomial_identity(density),
        regret_integral_identity(100, 0x5EED),
    ]
}
