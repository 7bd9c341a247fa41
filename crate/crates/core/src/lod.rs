//! Binomial log-likelihoods and lod scores.
//!
//! Everything here works in natural-log units. [`LodScore::in_base`] rescales
//! a score for display in base ten, the convention used for genetic lod
//! scores. Binomial coefficients are dropped throughout; they cancel in every
//! likelihood ratio.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;
use std::fmt;

use crate::error::{check_probability, Error, Result};

/// `x` successes out of `m` Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinomialData {
    successes: u64,
    trials: u64,
}

impl BinomialData {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Domain("binomial data needs at least one trial".into()));
        }
        if successes > trials {
            return Err(Error::Domain(format!(
                "{successes} successes exceed {trials} trials"
            )));
        }
        Ok(Self { successes, trials })
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn failures(&self) -> u64 {
        self.trials - self.successes
    }

    /// Pools two independent samples.
    pub fn concat(&self, other: &BinomialData) -> BinomialData {
        BinomialData {
            successes: self.successes + other.successes,
            trials: self.trials + other.trials,
        }
    }
}

/// Logarithm base used when reporting a lod score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

impl LogBase {
    /// Converts a natural-log quantity into this base.
    pub fn from_natural(self, value: f64) -> f64 {
        match self {
            LogBase::Natural => value,
            LogBase::Ten => value / LN_10,
        }
    }

    /// Converts a quantity expressed in this base back to natural-log units.
    pub fn to_natural(self, value: f64) -> f64 {
        match self {
            LogBase::Natural => value,
            LogBase::Ten => value * LN_10,
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogBase::Natural => f.write_str("e"),
            LogBase::Ten => f.write_str("10"),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "natural" | "ln" => Ok(LogBase::Natural),
            "10" | "ten" => Ok(LogBase::Ten),
            other => Err(Error::Invalid(format!("unknown log base '{other}', expected e or 10"))),
        }
    }
}

/// Which two parameter values a lod score compares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    /// Both probabilities fixed in advance.
    FixedPair { p1: f64, p2: f64 },
    /// Maximum-likelihood estimate of the data against the null value.
    MleVsNull { mle: f64, null: f64 },
}

/// A log likelihood-ratio value tagged with its base and comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LodScore {
    pub value: f64,
    pub log_base: LogBase,
    pub comparison: Comparison,
}

impl LodScore {
    fn natural(value: f64, comparison: Comparison) -> Self {
        Self {
            value,
            log_base: LogBase::Natural,
            comparison,
        }
    }

    /// The same score expressed in `base`.
    pub fn in_base(&self, base: LogBase) -> LodScore {
        let natural = self.log_base.to_natural(self.value);
        LodScore {
            value: base.from_natural(natural),
            log_base: base,
            comparison: self.comparison,
        }
    }

    /// Value in natural-log units regardless of the stored base.
    pub fn natural_value(&self) -> f64 {
        self.log_base.to_natural(self.value)
    }

    pub fn is_mle_vs_null(&self) -> bool {
        matches!(self.comparison, Comparison::MleVsNull { .. })
    }
}

/// `x * ln(y)` with the convention `0 * ln(0) = 0`.
pub(crate) fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Binomial log-likelihood `x log p + (m - x) log(1 - p)` in the given base.
pub fn binomial_loglik(data: BinomialData, p: f64, base: LogBase) -> Result<f64> {
    check_probability("p", p)?;
    let x = data.successes as f64;
    let y = data.failures() as f64;
    Ok(base.from_natural(x * p.ln() + y * (-p).ln_1p()))
}

/// Lod score of `p1` against `p2`, both fixed.
pub fn lod_fixed(data: BinomialData, p1: f64, p2: f64) -> Result<LodScore> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let x = data.successes as f64;
    let y = data.failures() as f64;
    let value = x * (p1 / p2).ln() + y * ((1.0 - p1) / (1.0 - p2)).ln();
    Ok(LodScore::natural(value, Comparison::FixedPair { p1, p2 }))
}

/// Maximum-likelihood estimate `x / m`. Boundary values are returned as-is.
pub fn mle(data: BinomialData) -> f64 {
    data.successes as f64 / data.trials as f64
}

/// Lod score of the MLE against the null `p0`. Always nonnegative.
pub fn lod_mle_vs_null(data: BinomialData, p0: f64) -> Result<LodScore> {
    check_probability("p0", p0)?;
    let p_hat = mle(data);
    let x = data.successes as f64;
    let y = data.failures() as f64;
    let value = xlogy(x, p_hat / p0) + xlogy(y, (1.0 - p_hat) / (1.0 - p0));
    // KL divergence is nonnegative; clamp the rounding residue near p_hat == p0.
    Ok(LodScore::natural(
        value.max(0.0),
        Comparison::MleVsNull { mle: p_hat, null: p0 },
    ))
}
