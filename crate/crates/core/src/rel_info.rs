//! Moments of the inverse empirical relative information.
//!
//! For a binomial study with `n` individuals of which `n0` are observed
//! (`x0` successes), resolving `n1` of the missing values turns the observed
//! lod `lod(p, p0; Y_ob)` into `lod_ob + lod_mis`. The ratio
//! `(lod_ob + lod_mis) / lod_ob` is the inverse empirical relative
//! information; this module gives its conditional mean and variance given the
//! observed data, the complete-data lod variance, and the plug-in estimates
//! obtained by evaluating at `p = x0 / n0`.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::lod::{lod_fixed, lod_mle_vs_null, BinomialData, LodScore};
use crate::settings::Settings;

/// A study variable with `n0` of `n` values observed and `x0` successes
/// among them, tested against the null success probability `p0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n: u64,
    pub n0: u64,
    pub x0: u64,
    pub p0: f64,
}

impl StudyConfig {
    pub fn new(n: u64, n0: u64, x0: u64, p0: f64) -> Result<Self> {
        let cfg = Self { n, n0, x0, p0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 {
            return Err(Error::Domain("n0 must be positive".into()));
        }
        if self.n0 > self.n {
            return Err(Error::Domain(format!(
                "n0 = {} exceeds n = {}",
                self.n0, self.n
            )));
        }
        if self.x0 > self.n0 {
            return Err(Error::Domain(format!(
                "x0 = {} exceeds n0 = {}",
                self.x0, self.n0
            )));
        }
        check_probability("p0", self.p0)
    }

    pub fn observed(&self) -> BinomialData {
        BinomialData::new(self.x0, self.n0).expect("validated study config")
    }

    /// Number of missing values, `n - n0`.
    pub fn missing(&self) -> u64 {
        self.n - self.n0
    }

    pub fn p_hat(&self) -> f64 {
        self.x0 as f64 / self.n0 as f64
    }

    fn check_n1(&self, n1: u64) -> Result<()> {
        if n1 > self.missing() {
            Err(Error::Domain(format!(
                "n1 = {n1} exceeds the {} missing values",
                self.missing()
            )))
        } else {
            Ok(())
        }
    }
}

/// Expected per-individual lod contribution, `p ln(p/p0) + (1-p) ln((1-p)/(1-p0))`.
fn expected_unit_lod(p: f64, p0: f64) -> f64 {
    p * (p / p0).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - p0)).ln()
}

/// `ln(p1/p2) - ln((1-p1)/(1-p2))`: the lod change from one extra success.
fn log_odds_gap(p1: f64, p2: f64) -> f64 {
    (p1 / p2).ln() - ((1.0 - p1) / (1.0 - p2)).ln()
}

/// Conditional variance of the complete-data `lod(p1, p2)` given the observed
/// data, when the `n - n0` missing values are Bernoulli(`p`).
pub fn complete_lod_variance(cfg: &StudyConfig, p: f64, p1: f64, p2: f64) -> Result<f64> {
    cfg.validate()?;
    check_probability("p", p)?;
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let gap = log_odds_gap(p1, p2);
    Ok(cfg.missing() as f64 * p * (1.0 - p) * gap * gap)
}

/// Observed `lod(p, p0; Y_ob)` after the stability check.
fn stable_observed_lod(cfg: &StudyConfig, p: f64, settings: &Settings) -> Result<f64> {
    let lod_ob = lod_fixed(cfg.observed(), p, cfg.p0)?.value;
    if lod_ob.abs() < settings.eps_lod {
        return Err(Error::Instability {
            ids: Vec::new(),
            lod_ob,
            eps: settings.eps_lod,
        });
    }
    Ok(lod_ob)
}

/// Expected inverse relative information after resolving `n1` missing values,
/// under true success probability `p`.
///
/// With `n1 = 0` the ratio is identically 1 and no stability check is made.
pub fn expected_inverse_ri(cfg: &StudyConfig, p: f64, n1: u64, settings: &Settings) -> Result<f64> {
    cfg.validate()?;
    cfg.check_n1(n1)?;
    check_probability("p", p)?;
    if n1 == 0 {
        return Ok(1.0);
    }
    let lod_ob = stable_observed_lod(cfg, p, settings)?;
    Ok(1.0 + n1 as f64 * expected_unit_lod(p, cfg.p0) / lod_ob)
}

/// Variance of the inverse relative information after resolving `n1` values.
pub fn variance_inverse_ri(cfg: &StudyConfig, p: f64, n1: u64, settings: &Settings) -> Result<f64> {
    cfg.validate()?;
    cfg.check_n1(n1)?;
    check_probability("p", p)?;
    if n1 == 0 {
        return Ok(0.0);
    }
    let lod_ob = stable_observed_lod(cfg, p, settings)?;
    let gap = log_odds_gap(p, cfg.p0);
    Ok(n1 as f64 * p * (1.0 - p) * gap * gap / (lod_ob * lod_ob))
}

/// How the unknown success probability is filled in.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiForm {
    /// Evaluate at the observed MLE `x0 / n0`.
    #[default]
    PlugIn,
    /// Evaluate at a fixed alternative `p`.
    Fixed { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelInfoSummary {
    pub n1: u64,
    pub expected_inverse_ri: f64,
    pub sd_inverse_ri: f64,
    /// Estimated relative information, `1 / expected_inverse_ri`.
    pub plugin_ri1: f64,
    pub stable: bool,
    pub lod_ob: LodScore,
}

/// Probability at which the plug-in formulas are evaluated.
pub fn plugin_probability(cfg: &StudyConfig, settings: &Settings) -> Result<f64> {
    cfg.validate()?;
    let p_hat = cfg.p_hat();
    if cfg.x0 == 0 || cfg.x0 == cfg.n0 {
        if !settings.continuity_correction {
            return Err(Error::BoundaryMle {
                x0: cfg.x0,
                n0: cfg.n0,
            });
        }
        let half = 0.5 / cfg.n0 as f64;
        return Ok(p_hat.clamp(half, 1.0 - half));
    }
    Ok(p_hat)
}

/// Plug-in summary: both moments evaluated at `p = x0 / n0`.
///
/// At an interior MLE the expectation reduces to `1 + n1 / n0`, so the
/// estimated relative information at full resolution is `n0 / n`.
pub fn plugin_summary(cfg: &StudyConfig, n1: u64, settings: &Settings) -> Result<RelInfoSummary> {
    let p = plugin_probability(cfg, settings)?;
    if p == cfg.p0 && n1 > 0 {
        return Err(Error::Instability {
            ids: Vec::new(),
            lod_ob: 0.0,
            eps: settings.eps_lod,
        });
    }
    let lod_ob = if p == cfg.p_hat() {
        lod_mle_vs_null(cfg.observed(), cfg.p0)?
    } else {
        lod_fixed(cfg.observed(), p, cfg.p0)?
    };
    summarize(cfg, p, n1, lod_ob, settings)
}

/// Summary at a fixed alternative `p`. A negative observed lod is allowed but
/// marks the summary unstable.
pub fn fixed_summary(cfg: &StudyConfig, p: f64, n1: u64, settings: &Settings) -> Result<RelInfoSummary> {
    cfg.validate()?;
    let lod_ob = lod_fixed(cfg.observed(), p, cfg.p0)?;
    summarize(cfg, p, n1, lod_ob, settings)
}

/// Summary in either form.
pub fn summary(cfg: &StudyConfig, form: RiForm, n1: u64, settings: &Settings) -> Result<RelInfoSummary> {
    match form {
        RiForm::PlugIn => plugin_summary(cfg, n1, settings),
        RiForm::Fixed { p } => fixed_summary(cfg, p, n1, settings),
    }
}

fn summarize(
    cfg: &StudyConfig,
    p: f64,
    n1: u64,
    lod_ob: LodScore,
    settings: &Settings,
) -> Result<RelInfoSummary> {
    let expected = expected_inverse_ri(cfg, p, n1, settings)?;
    let variance = variance_inverse_ri(cfg, p, n1, settings)?;
    let stable = lod_ob.value >= settings.eps_lod;
    Ok(RelInfoSummary {
        n1,
        expected_inverse_ri: expected,
        sd_inverse_ri: variance.sqrt(),
        plugin_ri1: 1.0 / expected,
        stable,
        lod_ob: lod_ob.in_base(settings.log_base),
    })
}

/// Number of new independent individuals that add as much expected
/// information as resolving the data up to relative information `ri`.
pub fn equivalent_additional_individuals(ri: f64, n: u64) -> Result<f64> {
    if !(ri > 0.0 && ri <= 1.0) {
        return Err(Error::Domain(format!("relative information {ri} is not in (0, 1]")));
    }
    Ok(n as f64 * (1.0 / ri - 1.0))
}
