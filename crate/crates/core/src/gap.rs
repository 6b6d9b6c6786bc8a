//! Epsilon-gap functions and per-trajectory lenient regret.
//!
//! An epsilon-gap function `f` vanishes on `[0, eps]` and is positive above
//! `eps`; the lenient regret of a run is `sum_t f(gap_t)`. The standard regret
//! is the 0-gap function `f(gap) = gap`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kl::Probability;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapFunction {
    /// `f(gap) = gap`
    Standard,
    /// `f(gap) = max(gap - eps, 0)`
    Hinge(Probability),
    /// `f(gap) = 1[gap > eps]`
    Indicator(Probability),
    /// `f(gap) = gap * 1[gap > eps]`
    ThresholdedGap(Probability),
}

impl GapFunction {
    pub fn hinge(eps: f64) -> Result<Self> {
        Ok(Self::Hinge(Probability::new(eps)?))
    }

    pub fn indicator(eps: f64) -> Result<Self> {
        Ok(Self::Indicator(Probability::new(eps)?))
    }

    pub fn thresholded(eps: f64) -> Result<Self> {
        Ok(Self::ThresholdedGap(Probability::new(eps)?))
    }

    /// The leniency below which gaps are free. `0` for the standard regret.
    pub fn eps(&self) -> f64 {
        match self {
            Self::Standard => 0.0,
            Self::Hinge(e) | Self::Indicator(e) | Self::ThresholdedGap(e) => e.get(),
        }
    }

    #[inline]
    pub fn evaluate(&self, gap: f64) -> f64 {
        match *self {
            Self::Standard => gap,
            Self::Hinge(e) => (gap - e.get()).max(0.0),
            Self::Indicator(e) => {
                if gap > e.get() {
                    1.0
                } else {
                    0.0
                }
            }
            Self::ThresholdedGap(e) => {
                if gap > e.get() {
                    gap
                } else {
                    0.0
                }
            }
        }
    }
}

/// Lenient regret of one realized sequence of per-step gaps.
pub fn trajectory_regret(f: &GapFunction, gaps: &[f64]) -> f64 {
    gaps.iter().map(|&g| f.evaluate(g)).sum()
}

impl fmt::Display for GapFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Standard => f.write_str("standard"),
            Self::Hinge(e) => write!(f, "hinge:{e}"),
            Self::Indicator(e) => write!(f, "indicator:{e}"),
            Self::ThresholdedGap(e) => write!(f, "thresholded:{e}"),
        }
    }
}

impl FromStr for GapFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "gap function",
            input: s.to_owned(),
        };
        let s = s.trim();
        if s == "standard" {
            return Ok(Self::Standard);
        }
        let (name, eps) = s.split_once(':').ok_or_else(bad)?;
        let eps: f64 = eps.trim().parse().map_err(|_| bad())?;
        match name.trim() {
            "hinge" => Self::hinge(eps),
            "indicator" => Self::indicator(eps),
            "thresholded" => Self::thresholded(eps),
            _ => Err(bad()),
        }
    }
}
