//! Accuracy prediction across decision window lengths.
//!
//! Labeled (attended, unattended) correlations measured at one baseline window
//! are Fisher-transformed; the mean and variance of the per-window difference
//! `z_att - z_unatt` describe a normal decision variable. Both parameters are
//! carried to any other window length with the first-order Hotelling
//! corrections, and the accuracy is the probability that the decision
//! variable is positive.

use crate::bootstrap::{self, CiConfig};
use crate::error::{Error, Result};
use crate::stats::{fisher, std_normal_cdf};
use serde::{Deserialize, Serialize};

/// Number of samples in a window, `round(window_s * fs_hz)`, at least 2.
pub fn samples_for_window(window_s: f64, fs_hz: f64) -> Result<usize> {
    if !(window_s > 0.0 && window_s.is_finite()) {
        return Err(Error::InvalidWindow(format!(
            "window length must be positive, got {window_s}"
        )));
    }
    if !(fs_hz > 0.0 && fs_hz.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "sampling rate must be positive, got {fs_hz}"
        )));
    }
    let n = (window_s * fs_hz).round();
    if n < 2.0 {
        return Err(Error::InvalidWindow(format!(
            "{window_s} s at {fs_hz} Hz gives {n} samples, need at least 2"
        )));
    }
    Ok(n as usize)
}

/// One labeled decision window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub r_att: f64,
    pub r_unatt: f64,
}

impl CorrelationPair {
    pub fn new(r_att: f64, r_unatt: f64) -> Self {
        Self { r_att, r_unatt }
    }

    /// Strict comparison; ties decode as incorrect.
    pub fn is_correct(&self) -> bool {
        self.r_att > self.r_unatt
    }
}

/// Labeled correlations measured at a single window length.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorrelationSet {
    pairs: Vec<CorrelationPair>,
    window_s: f64,
    fs_hz: f64,
    n_samples: usize,
}

impl LabeledCorrelationSet {
    /// Validates the correlations and the window metadata. An empty set is
    /// rejected; the two-pair minimum for a variance is enforced by
    /// [`estimate_model`].
    pub fn new(pairs: Vec<CorrelationPair>, window_s: f64, fs_hz: f64) -> Result<Self> {
        let n_samples = samples_for_window(window_s, fs_hz)?;
        if pairs.is_empty() {
            return Err(Error::EmptySet);
        }
        for p in &pairs {
            for r in [p.r_att, p.r_unatt] {
                if !(-1.0..=1.0).contains(&r) {
                    return Err(Error::OutOfDomain {
                        what: "correlation",
                        value: r,
                    });
                }
            }
        }
        Ok(Self {
            pairs,
            window_s,
            fs_hz,
            n_samples,
        })
    }

    pub fn pairs(&self) -> &[CorrelationPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn window_s(&self) -> f64 {
        self.window_s
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Total duration of the labeled windows, in seconds.
    pub fn total_duration_s(&self) -> f64 {
        self.window_s * self.pairs.len() as f64
    }

    /// Same metadata, different pairs (used for subsets and resamples).
    pub fn with_pairs(&self, pairs: Vec<CorrelationPair>) -> Result<Self> {
        Self::new(pairs, self.window_s, self.fs_hz)
    }
}

/// Parameters of the Fisher-domain decision variable at the baseline window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionVariableModel {
    pub mu_diff: f64,
    pub sigma_sum_sq: f64,
    pub rho_att: f64,
    pub rho_unatt: f64,
    pub n_baseline: usize,
    pub m_count: usize,
    #[serde(skip)]
    pub fs_hz: f64,
}

/// Summary statistics of the labeled pairs that the model is built from.
/// Kept separate so the bootstrap can rebuild a model from resampled sums.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairSummary {
    pub mean_diff: f64,
    pub var_diff: f64,
    pub mean_att: f64,
    pub mean_unatt: f64,
    pub count: usize,
}

/// Fisher-domain difference and raw correlations of one pair.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TransformedPair {
    pub z_diff: f64,
    pub r_att: f64,
    pub r_unatt: f64,
}

pub(crate) fn transform_pairs(data: &LabeledCorrelationSet) -> Result<Vec<TransformedPair>> {
    data.pairs
        .iter()
        .map(|p| {
            Ok(TransformedPair {
                z_diff: fisher(p.r_att)? - fisher(p.r_unatt)?,
                r_att: p.r_att,
                r_unatt: p.r_unatt,
            })
        })
        .collect()
}

/// Mean and unbiased variance of the differences plus raw correlation means
/// over the selected pairs.
pub(crate) fn summarize<'a>(pairs: impl Iterator<Item = &'a TransformedPair> + Clone) -> PairSummary {
    let mut count = 0usize;
    let (mut sd, mut sa, mut su) = (0.0, 0.0, 0.0);
    for p in pairs.clone() {
        count += 1;
        sd += p.z_diff;
        sa += p.r_att;
        su += p.r_unatt;
    }
    let n = count as f64;
    let mean_diff = sd / n;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ss = 0.0;
    for p in pairs {
        lo = lo.min(p.z_diff);
        hi = hi.max(p.z_diff);
        ss += (p.z_diff - mean_diff).powi(2);
    }
    // Identical differences must give exactly zero, not rounding residue.
    if lo == hi {
        ss = 0.0;
    }
    PairSummary {
        mean_diff,
        var_diff: if count > 1 { ss / (n - 1.0) } else { 0.0 },
        mean_att: sa / n,
        mean_unatt: su / n,
        count,
    }
}

impl PairSummary {
    pub(crate) fn into_model(self, n_baseline: usize, fs_hz: f64) -> DecisionVariableModel {
        DecisionVariableModel {
            mu_diff: self.mean_diff,
            sigma_sum_sq: self.var_diff,
            rho_att: self.mean_att,
            rho_unatt: self.mean_unatt,
            n_baseline,
            m_count: self.count,
            fs_hz,
        }
    }
}

/// Estimate the decision-variable parameters at the baseline window.
///
/// `rho_att`/`rho_unatt` are means of the raw correlations; `mu_diff` and
/// `sigma_sum_sq` are the mean and unbiased variance of
/// `artanh(r_att) - artanh(r_unatt)`. A zero variance is returned as is and
/// rejected later by [`extrapolate`] / [`predict_accuracy`].
pub fn estimate_model(data: &LabeledCorrelationSet) -> Result<DecisionVariableModel> {
    if data.len() < 2 {
        return Err(Error::TooFewSamples {
            got: data.len(),
            need: 2,
        });
    }
    let transformed = transform_pairs(data)?;
    Ok(summarize(transformed.iter()).into_model(data.n_samples, data.fs_hz))
}

/// Decision-variable parameters at a target window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated {
    pub mu_diff: f64,
    pub sigma_sum_sq: f64,
}

/// Carry the model from its baseline window to `target_window_s`.
pub fn extrapolate(model: &DecisionVariableModel, target_window_s: f64) -> Result<Extrapolated> {
    let n_target = samples_for_window(target_window_s, model.fs_hz)?;
    extrapolate_samples(model, n_target)
}

/// [`extrapolate`] with the target given directly as a sample count.
pub fn extrapolate_samples(model: &DecisionVariableModel, n_target: usize) -> Result<Extrapolated> {
    if n_target < 2 {
        return Err(Error::InvalidWindow(format!(
            "target has {n_target} samples, need at least 2"
        )));
    }
    if !(model.sigma_sum_sq > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let n1 = model.n_baseline as f64;
    let n2 = n_target as f64;
    let mean_shift = (n2 - n1) * (model.rho_att - model.rho_unatt) / (2.0 * (n2 - 1.0) * (n1 - 1.0));
    Ok(Extrapolated {
        mu_diff: model.mu_diff + mean_shift,
        sigma_sum_sq: model.sigma_sum_sq * (n1 - 1.0) / (n2 - 1.0),
    })
}

/// Accuracy in percent: `100 * P(z_att - z_unatt > 0)`.
pub fn predict_accuracy(mu_diff: f64, sigma_sum_sq: f64) -> Result<f64> {
    if !(sigma_sum_sq > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(100.0 * std_normal_cdf(mu_diff / sigma_sum_sq.sqrt()))
}

/// Convenience: predicted accuracy of `model` at `target_window_s`.
pub fn predict_at(model: &DecisionVariableModel, target_window_s: f64) -> Result<f64> {
    let e = extrapolate(model, target_window_s)?;
    predict_accuracy(e.mu_diff, e.sigma_sum_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub window_s: f64,
    pub accuracy_pct: f64,
    pub ci_low_pct: f64,
    pub ci_high_pct: f64,
}

/// Predicted accuracy with confidence interval per target window, sorted by
/// descending window length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceCurve {
    pub points: Vec<CurvePoint>,
    pub baseline_window_s: f64,
    pub fs_hz: f64,
    pub bootstrap_samples: usize,
    pub ci_level: f64,
}

/// Full curve result: the curve itself plus what produced it.
#[derive(Debug, Clone)]
pub struct CurveFit {
    pub model: DecisionVariableModel,
    pub curve: PerformanceCurve,
    pub intervals: Vec<bootstrap::CiResult>,
}

/// Targets sorted descending; rejects empty, non-positive and duplicate entries.
pub fn sorted_targets(targets: &[f64]) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Err(Error::InvalidConfig("no target windows".into()));
    }
    let mut sorted = targets.to_vec();
    for &t in &sorted {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidWindow(format!("target window must be positive, got {t}")));
        }
    }
    sorted.sort_by(|a, b| b.total_cmp(a));
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig(format!("duplicate target window {}", w[0])));
    }
    Ok(sorted)
}

/// Predict the performance curve at `targets` with BCa intervals.
pub fn model_curve(data: &LabeledCorrelationSet, targets: &[f64], ci: &CiConfig) -> Result<PerformanceCurve> {
    fit_curve(data, targets, ci).map(|fit| fit.curve)
}

/// [`model_curve`], also returning the baseline model and raw interval results.
pub fn fit_curve(data: &LabeledCorrelationSet, targets: &[f64], ci: &CiConfig) -> Result<CurveFit> {
    let targets = sorted_targets(targets)?;
    let model = estimate_model(data)?;
    let intervals = bootstrap::bca_intervals(data, &targets, ci)?;
    let points = targets
        .iter()
        .zip(&intervals)
        .map(|(&window_s, ci)| CurvePoint {
            window_s,
            accuracy_pct: ci.point_pct,
            ci_low_pct: ci.low_pct,
            ci_high_pct: ci.high_pct,
        })
        .collect();
    Ok(CurveFit {
        model,
        curve: PerformanceCurve {
            points,
            baseline_window_s: data.window_s,
            fs_hz: data.fs_hz,
            bootstrap_samples: ci.n_boot,
            ci_level: ci.level,
        },
        intervals,
    })
}
