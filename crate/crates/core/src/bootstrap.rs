//! Bias-corrected and accelerated (BCa) bootstrap intervals for predicted
//! accuracies.
//!
//! The labeled pairs are resampled jointly with replacement. Resample `b`
//! (redraw attempt `k`) draws from the stream `(seed, [BOOTSTRAP, b, k])`, so
//! every target window sees the same resamples and results do not depend on
//! evaluation order. A resample whose Fisher differences have zero variance
//! is discarded and redrawn, up to `10 * n_boot` attempts in total.

use crate::error::{Error, Result};
use crate::model::{
    predict_accuracy, samples_for_window, sorted_targets, summarize, transform_pairs, LabeledCorrelationSet,
    PairSummary, TransformedPair,
};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::stats::normal_quantile;
use crate::stats::std_normal_cdf;

pub const DEFAULT_N_BOOT: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiConfig {
    pub n_boot: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for CiConfig {
    fn default() -> Self {
        Self {
            n_boot: DEFAULT_N_BOOT,
            level: DEFAULT_LEVEL,
            seed: 0,
        }
    }
}

impl CiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_boot < 100 {
            return Err(Error::InvalidConfig(format!(
                "n_boot must be at least 100, got {}",
                self.n_boot
            )));
        }
        if !(self.level > 0.5 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence level must be in (0.5, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Interval for one target window. Bounds and point estimate are percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiResult {
    pub low_pct: f64,
    pub high_pct: f64,
    pub point_pct: f64,
    pub n_boot_effective: usize,
    /// Jackknife values had no spread, so the acceleration was set to zero.
    pub percentile_fallback: bool,
    /// The adjusted interval missed the point estimate and was widened to it.
    pub bracket_expanded: bool,
}

/// BCa interval for the predicted accuracy at one target window.
pub fn bca_interval(data: &LabeledCorrelationSet, target_window_s: f64, cfg: &CiConfig) -> Result<CiResult> {
    let mut out = bca_intervals(data, &[target_window_s], cfg)?;
    Ok(out.remove(0))
}

/// BCa intervals for several targets sharing one set of resamples. Results
/// are in the order of `targets`.
pub fn bca_intervals(data: &LabeledCorrelationSet, targets: &[f64], cfg: &CiConfig) -> Result<Vec<CiResult>> {
    cfg.validate()?;
    sorted_targets(targets)?;
    let m = data.len();
    if m < 2 {
        return Err(Error::TooFewSamples { got: m, need: 2 });
    }
    let n1 = data.n_samples();
    let n_targets = targets
        .iter()
        .map(|&t| samples_for_window(t, data.fs_hz()))
        .collect::<Result<Vec<_>>>()?;
    let pairs = transform_pairs(data)?;

    let full = summarize(pairs.iter());
    let points = n_targets
        .iter()
        .map(|&n2| accuracy(&full, n1, n2))
        .collect::<Result<Vec<_>>>()?;

    // Bootstrap distribution, one column per target.
    let mut boot: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.n_boot); targets.len()];
    let max_attempts = 10 * cfg.n_boot;
    let mut attempts = 0usize;
    let mut indices = vec![0usize; m];
    for b in 0..cfg.n_boot {
        let summary = loop {
            if attempts >= max_attempts {
                return Err(Error::ZeroVariance);
            }
            let mut rng = rng::stream(cfg.seed, &[rng::tag::BOOTSTRAP, b as u64, attempts as u64]);
            attempts += 1;
            for idx in indices.iter_mut() {
                *idx = rng.random_range(0..m);
            }
            let s = summarize(indices.iter().map(|&i| &pairs[i]));
            if s.var_diff > 0.0 {
                break s;
            }
        };
        for (col, &n2) in boot.iter_mut().zip(&n_targets) {
            if let Ok(a) = accuracy(&summary, n1, n2) {
                if a.is_finite() {
                    col.push(a);
                }
            }
        }
    }

    let jackknife: Vec<Vec<f64>> = n_targets.iter().map(|&n2| jackknife_values(&pairs, n1, n2)).collect();

    boot.iter_mut()
        .zip(points)
        .zip(&jackknife)
        .map(|((col, point), jack)| {
            col.sort_by(f64::total_cmp);
            let bounds = bca_bounds(col, point, jack, cfg.level)?;
            Ok(CiResult {
                low_pct: bounds.low,
                high_pct: bounds.high,
                point_pct: point,
                n_boot_effective: col.len(),
                percentile_fallback: bounds.percentile_fallback,
                bracket_expanded: bounds.bracket_expanded,
            })
        })
        .collect()
}

fn accuracy(s: &PairSummary, n1: usize, n2: usize) -> Result<f64> {
    let model = s.into_model(n1, f64::NAN);
    let e = crate::model::extrapolate_samples(&model, n2)?;
    predict_accuracy(e.mu_diff, e.sigma_sum_sq)
}

/// Leave-one-out statistics. Entries whose subset cannot produce a finite
/// statistic (zero variance, or a single remaining pair) are dropped.
fn jackknife_values(pairs: &[TransformedPair], n1: usize, n2: usize) -> Vec<f64> {
    (0..pairs.len())
        .filter_map(|skip| {
            let rest = pairs
                .iter()
                .enumerate()
                .filter(move |&(i, _)| i != skip)
                .map(|(_, p)| p);
            let s = summarize(rest);
            if s.count < 2 {
                return None;
            }
            accuracy(&s, n1, n2).ok().filter(|a| a.is_finite())
        })
        .collect()
}

/// Adjusted interval endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcaBounds {
    pub low: f64,
    pub high: f64,
    pub z0: f64,
    pub acceleration: f64,
    pub percentile_fallback: bool,
    pub bracket_expanded: bool,
}

/// BCa endpoints from a *sorted* bootstrap distribution, the original point
/// estimate and the jackknife values.
pub fn bca_bounds(sorted_boot: &[f64], point: f64, jackknife: &[f64], level: f64) -> Result<BcaBounds> {
    let b = sorted_boot.len();
    if b == 0 {
        return Err(Error::ZeroVariance);
    }
    let bf = b as f64;

    let below = sorted_boot.iter().filter(|&&v| v < point).count() as f64;
    let ties = sorted_boot.iter().filter(|&&v| v == point).count() as f64;
    // Keep the fraction off 0 and 1 so the quantile stays finite.
    let frac = ((below + 0.5 * ties) / bf).clamp(0.5 / bf, 1.0 - 0.5 / bf);
    let z0 = normal_quantile(frac)?;

    let (acceleration, percentile_fallback) = acceleration(jackknife);

    let z_lo = normal_quantile((1.0 - level) / 2.0)?;
    let adjusted = |z: f64| {
        let x = z0 + z;
        let denom = 1.0 - acceleration * x;
        if denom <= 0.0 {
            if x < 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            std_normal_cdf(z0 + x / denom)
        }
    };
    let mut low = nearest_rank(sorted_boot, adjusted(z_lo));
    let mut high = nearest_rank(sorted_boot, adjusted(-z_lo));

    let mut bracket_expanded = false;
    if low > point {
        low = point;
        bracket_expanded = true;
    }
    if high < point {
        high = point;
        bracket_expanded = true;
    }
    Ok(BcaBounds {
        low: low.clamp(0.0, 100.0),
        high: high.clamp(0.0, 100.0),
        z0,
        acceleration,
        percentile_fallback,
        bracket_expanded,
    })
}

/// Jackknife acceleration; `(0, true)` when the jackknife values have no spread.
fn acceleration(jackknife: &[f64]) -> (f64, bool) {
    if jackknife.len() < 2 {
        return (0.0, true);
    }
    let mean = jackknife.iter().sum::<f64>() / jackknife.len() as f64;
    let (mut s2, mut s3) = (0.0, 0.0);
    for &v in jackknife {
        let d = mean - v;
        s2 += d * d;
        s3 += d * d * d;
    }
    if !(s2 > 0.0) {
        return (0.0, true);
    }
    let a = s3 / (6.0 * s2.powf(1.5));
    if a.is_finite() {
        (a, false)
    } else {
        (0.0, true)
    }
}

/// Nearest-rank quantile of a sorted sample.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    // The slack keeps p = 0.025 from landing one rank high when it arrives
    // as 0.025000000000000001 through the normal CDF.
    let rank = (p * n as f64 - 1e-9).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}
