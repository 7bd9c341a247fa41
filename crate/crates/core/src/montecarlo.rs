//! Seeded simulation of observed/complete lod pairs and the exact oracles
//! used to check the closed-form moments.
//!
//! Every replicate draws from its own ChaCha stream keyed by
//! `(seed, replicate index)`, and binomial variates come from CDF inversion
//! against a precomputed table. Results are assembled by replicate index, so
//! a run is bit-identical for any number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::lod::{lod_fixed, lod_mle_vs_null, BinomialData};
use crate::rel_info::{plugin_summary, StudyConfig};
use crate::settings::Settings;

/// Tool defaults for the true success probabilities of the contour study.
pub const DEFAULT_TRUE_PS: [f64; 3] = [0.55, 0.6, 0.7];

/// Pairs with an observed lod below this (natural-log units) are left out of
/// ratio statistics.
pub const DEFAULT_RATIO_FLOOR: f64 = 1e-3;

/// Reference lines `y = r x` always drawn on contour grids.
pub const BASE_REFERENCE_RATIOS: [f64; 2] = [1.0, 1.25];

/// Largest number of missing values the exact enumeration accepts.
pub const ENUMERATION_LIMIT: u64 = 100_000;

/// Exact Binomial(trials, p) masses and CDF, for enumeration and inversion.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    masses: Vec<f64>,
    cdf: Vec<f64>,
}

impl BinomialTable {
    pub fn new(trials: u64, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        // Ratio recurrence outward from the mode keeps the relative error of
        // the bulk masses near machine precision.
        let odds = p / (1.0 - p);
        let mode = (((trials + 1) as f64 * p).floor() as u64).min(trials);
        let mut masses = vec![0.0; trials as usize + 1];
        masses[mode as usize] = 1.0;
        for k in mode..trials {
            masses[k as usize + 1] = masses[k as usize] * odds * (trials - k) as f64 / (k + 1) as f64;
        }
        for k in (1..=mode).rev() {
            masses[k as usize - 1] = masses[k as usize] / odds * k as f64 / (trials - k + 1) as f64;
        }
        let total: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= total);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        *cdf.last_mut().expect("at least one outcome") = 1.0;
        Ok(Self { masses, cdf })
    }

    pub fn trials(&self) -> u64 {
        self.masses.len() as u64 - 1
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Smallest `k` with `P(X <= k) > u`, for `u` in `[0, 1)`.
    pub fn invert(&self, u: f64) -> u64 {
        self.cdf.partition_point(|&c| c <= u) as u64
    }
}

/// The RNG stream for one replicate.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u64,
    pub n0: u64,
    pub true_p: f64,
    pub p0: f64,
    pub replicates: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.n0 > self.n {
            return Err(Error::Invalid(format!(
                "need 0 < n0 <= n, got n0 = {}, n = {}",
                self.n0, self.n
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Invalid("replicates must be at least 1".into()));
        }
        check_probability("true_p", self.true_p)?;
        check_probability("p0", self.p0)
    }
}

/// Simulated `(lod_ob, lod_co)` pairs, both MLE-vs-null in natural-log units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSample {
    pub config: SimConfig,
    pub pairs: Vec<(f64, f64)>,
}

impl JointSample {
    /// Pearson correlation of the pairs; `None` if either margin is constant.
    pub fn correlation(&self) -> Option<f64> {
        let len = self.pairs.len() as f64;
        let (mx, my) = self
            .pairs
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (mx / len, my / len);
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (x, y) in &self.pairs {
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
            sxy += (x - mx) * (y - my);
        }
        if sxx == 0.0 || syy == 0.0 {
            None
        } else {
            Some(sxy / (sxx * syy).sqrt())
        }
    }
}

/// Draws observed and missing counts under `true_p` and scores both the
/// observed and the completed data against `p0` at their own MLEs.
pub fn simulate_joint_lod(cfg: &SimConfig) -> Result<JointSample> {
    cfg.validate()?;
    let observed = BinomialTable::new(cfg.n0, cfg.true_p)?;
    let missing = BinomialTable::new(cfg.n - cfg.n0, cfg.true_p)?;
    let pairs = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(cfg.seed, r);
            let x_ob = observed.invert(rng.random());
            let x_mis = missing.invert(rng.random());
            let ob = BinomialData::new(x_ob, cfg.n0)?;
            let co = BinomialData::new(x_ob + x_mis, cfg.n)?;
            Ok((
                lod_mle_vs_null(ob, cfg.p0)?.value,
                lod_mle_vs_null(co, cfg.p0)?.value,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JointSample {
        config: *cfg,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub ratio_floor: f64,
    pub included: usize,
    pub excluded: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator; 0 for a single pair).
    pub sd: f64,
    pub max: f64,
    /// `(level, value)` for levels 0.5, 0.9 and 0.99.
    pub quantiles: Vec<(f64, f64)>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], level: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summary of `lod_co / lod_ob` over pairs with `lod_ob >= ratio_floor`.
pub fn empirical_ratio_stats(sample: &JointSample, ratio_floor: f64) -> Result<RatioStats> {
    if !(ratio_floor > 0.0) {
        return Err(Error::Invalid(format!("ratio floor {ratio_floor} must be positive")));
    }
    let mut ratios: Vec<f64> = sample
        .pairs
        .iter()
        .filter(|(ob, _)| *ob >= ratio_floor)
        .map(|(ob, co)| co / ob)
        .collect();
    if ratios.is_empty() {
        return Err(Error::AllExcluded {
            total: sample.pairs.len(),
            floor: ratio_floor,
        });
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let len = ratios.len();
    let mean = ratios.iter().sum::<f64>() / len as f64;
    let sd = if len > 1 {
        (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (len - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(RatioStats {
        ratio_floor,
        included: len,
        excluded: sample.pairs.len() - len,
        mean,
        sd,
        max: ratios[len - 1],
        quantiles: [0.5, 0.9, 0.99]
            .into_iter()
            .map(|q| (q, quantile(&ratios, q)))
            .collect(),
    })
}

fn stable_fixed_lod(cfg: &StudyConfig, true_p: f64, settings: &Settings) -> Result<f64> {
    let lod_ob = lod_fixed(cfg.observed(), true_p, cfg.p0)?.value;
    if lod_ob.abs() < settings.eps_lod {
        return Err(Error::Instability {
            ids: Vec::new(),
            lod_ob,
            eps: settings.eps_lod,
        });
    }
    Ok(lod_ob)
}

/// Samples the inverse empirical relative information given the observed
/// data: every missing value is drawn under `true_p` and the fixed-parameter
/// lods at `(true_p, p0)` are compared.
pub fn conditional_simulate(
    cfg: &StudyConfig,
    true_p: f64,
    replicates: u64,
    seed: u64,
    settings: &Settings,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_probability("true_p", true_p)?;
    let lod_ob = stable_fixed_lod(cfg, true_p, settings)?;
    let missing = BinomialTable::new(cfg.missing(), true_p)?;
    let m = cfg.missing() as f64;
    let (up, down) = ((true_p / cfg.p0).ln(), ((1.0 - true_p) / (1.0 - cfg.p0)).ln());
    Ok((0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let k = missing.invert(rng.random()) as f64;
            let lod_mis = k * up + (m - k) * down;
            (lod_ob + lod_mis) / lod_ob
        })
        .collect())
}

/// Exact conditional mean and variance of the inverse empirical relative
/// information, by enumerating every count of successes among the missing.
pub fn exact_conditional_moments(cfg: &StudyConfig, true_p: f64, settings: &Settings) -> Result<(f64, f64)> {
    cfg.validate()?;
    check_probability("true_p", true_p)?;
    if cfg.missing() > ENUMERATION_LIMIT {
        return Err(Error::Size {
            size: cfg.missing() as u128 + 1,
            limit: ENUMERATION_LIMIT as u128 + 1,
        });
    }
    let lod_ob = stable_fixed_lod(cfg, true_p, settings)?;
    let table = BinomialTable::new(cfg.missing(), true_p)?;
    let m = cfg.missing();
    // Moments of the missing-data lod first; the ratio is the affine map
    // 1 + lod_mis / lod_ob, which keeps the centred sums well conditioned.
    let lod_mis: Vec<f64> = (0..=m)
        .map(|k| {
            if m == 0 {
                Ok(0.0)
            } else {
                lod_fixed(BinomialData::new(k, m)?, true_p, cfg.p0).map(|l| l.value)
            }
        })
        .collect::<Result<_>>()?;
    let mis_mean: f64 = table.masses().iter().zip(&lod_mis).map(|(w, l)| w * l).sum();
    let mis_var: f64 = table
        .masses()
        .iter()
        .zip(&lod_mis)
        .map(|(w, l)| w * (l - mis_mean) * (l - mis_mean))
        .sum();
    let mean = 1.0 + mis_mean / lod_ob;
    let variance = mis_var / (lod_ob * lod_ob);
    Ok((mean, variance))
}

/// Equal-width two-dimensional histogram of a joint sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[ix][iy]`.
    pub counts: Vec<Vec<u64>>,
    pub normalized: Vec<Vec<f64>>,
    /// Slopes of the reference lines `y = r x`.
    pub reference_ratios: Vec<f64>,
}

fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let (lo, hi) = if hi > lo {
        let pad = 0.01 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    (0..=bins).map(|i| lo + i as f64 * width).collect()
}

fn bin_of(edges: &[f64], v: f64) -> usize {
    let bins = edges.len() - 1;
    let lo = edges[0];
    let width = (edges[bins] - lo) / bins as f64;
    (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1)
}

impl DensityGrid {
    pub fn bins_x(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn bins_y(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn x_centers(&self) -> Vec<f64> {
        self.x_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        self.y_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Cell with the largest count; the first in `(ix, iy)` order on ties.
    pub fn max_cell(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (ix, col) in self.counts.iter().enumerate() {
            for (iy, &c) in col.iter().enumerate() {
                if c > self.counts[best.0][best.1] {
                    best = (ix, iy);
                }
            }
        }
        best
    }

    /// Whether the line `y = r x` passes through the 3x3 block of cells
    /// centred on `(ix, iy)`.
    pub fn line_within_one_cell(&self, r: f64, ix: usize, iy: usize) -> bool {
        let x_lo = self.x_edges[ix.saturating_sub(1)];
        let x_hi = self.x_edges[(ix + 2).min(self.bins_x())];
        let y_lo = self.y_edges[iy.saturating_sub(1)];
        let y_hi = self.y_edges[(iy + 2).min(self.bins_y())];
        let (a, b) = (r * x_lo, r * x_hi);
        a.min(b) <= y_hi && a.max(b) >= y_lo
    }
}

/// Histogram of the sample over its bounding box, widened by 1% per side.
/// Reference lines for `r = 1`, `r = 1.25` and every `extra_ratios` value are
/// attached.
pub fn contour_grid(
    sample: &JointSample,
    bins_x: usize,
    bins_y: usize,
    extra_ratios: &[f64],
) -> Result<DensityGrid> {
    if bins_x < 2 || bins_y < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 bins per axis, got {bins_x} x {bins_y}"
        )));
    }
    if sample.pairs.is_empty() {
        return Err(Error::Invalid("cannot bin an empty sample".into()));
    }
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &sample.pairs {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let x_edges = edges(x_lo, x_hi, bins_x);
    let y_edges = edges(y_lo, y_hi, bins_y);
    let mut counts = vec![vec![0u64; bins_y]; bins_x];
    for &(x, y) in &sample.pairs {
        counts[bin_of(&x_edges, x)][bin_of(&y_edges, y)] += 1;
    }
    let total = sample.pairs.len() as f64;
    let normalized = counts
        .iter()
        .map(|col| col.iter().map(|&c| c as f64 / total).collect())
        .collect();
    let mut reference_ratios: Vec<f64> = BASE_REFERENCE_RATIOS
        .iter()
        .chain(extra_ratios)
        .copied()
        .filter(|r| r.is_finite())
        .collect();
    reference_ratios.sort_by(|a, b| a.total_cmp(b));
    reference_ratios.dedup();
    Ok(DensityGrid {
        x_edges,
        y_edges,
        counts,
        normalized,
        reference_ratios,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdRow {
    pub x0: u64,
    /// `None` where the plug-in ratio is unstable or the MLE is on the boundary.
    pub sd_inverse_ri: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub true_p: f64,
    /// Binomial(n0, true_p) mass at each `x0 = 0..=n0`.
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdCurve {
    pub n: u64,
    pub n0: u64,
    pub p0: f64,
    pub rows: Vec<SdRow>,
    pub density_curves: Vec<DensityCurve>,
}

/// Plug-in standard deviation of the inverse relative information at full
/// resolution for every possible observed count, with the sampling
/// distribution of that count under each `true_ps` value.
pub fn sd_curve(n: u64, n0: u64, p0: f64, true_ps: &[f64], settings: &Settings) -> Result<SdCurve> {
    StudyConfig::new(n, n0, 0, p0)?;
    let rows = (0..=n0)
        .map(|x0| {
            let cfg = StudyConfig::new(n, n0, x0, p0)?;
            let sd = match plugin_summary(&cfg, cfg.missing(), settings) {
                Ok(s) if s.stable => Some(s.sd_inverse_ri),
                Ok(_) | Err(Error::Instability { .. } | Error::BoundaryMle { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(SdRow { x0, sd_inverse_ri: sd })
        })
        .collect::<Result<Vec<_>>>()?;
    let density_curves = true_ps
        .iter()
        .map(|&p| {
            Ok(DensityCurve {
                true_p: p,
                masses: BinomialTable::new(n0, p)?.masses().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SdCurve {
        n,
        n0,
        p0,
        rows,
        density_curves,
    })
}
