//! Ground-truth curves and modeled-vs-true comparisons: absolute error in
//! percent points, confidence-interval coverage, estimation-data sweeps and
//! baseline-window sweeps.

use crate::bootstrap::CiConfig;
use crate::error::{Error, Result};
use crate::model::{model_curve, sorted_targets, CurvePoint, LabeledCorrelationSet, PerformanceCurve};
use crate::rng;
use crate::synthetic::windows_in_minutes;
use serde::{Deserialize, Serialize};

/// Grid points closer than this (seconds) are the same window length.
pub const WINDOW_MATCH_TOL_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthPoint {
    pub window_s: f64,
    pub accuracy_pct: f64,
    pub n_decisions: usize,
    pub n_correct: usize,
}

/// Empirical accuracy per window length, sorted by descending window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthCurve {
    pub points: Vec<TruthPoint>,
}

impl GroundTruthCurve {
    pub fn accuracy_at(&self, window_s: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| same_window(p.window_s, window_s))
            .map(|p| p.accuracy_pct)
    }
}

fn same_window(a: f64, b: f64) -> bool {
    (a - b).abs() <= WINDOW_MATCH_TOL_S
}

/// Count decisions per set; `r_att > r_unatt` is correct, ties are not.
pub fn ground_truth_curve(sets: &[LabeledCorrelationSet]) -> Result<GroundTruthCurve> {
    if sets.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut points = sets
        .iter()
        .map(|set| {
            if set.is_empty() {
                return Err(Error::EmptySet);
            }
            let n_correct = set.pairs().iter().filter(|p| p.is_correct()).count();
            Ok(TruthPoint {
                window_s: set.window_s(),
                accuracy_pct: 100.0 * n_correct as f64 / set.len() as f64,
                n_decisions: set.len(),
                n_correct,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| b.window_s.total_cmp(&a.window_s));
    if let Some(w) = points.windows(2).find(|w| same_window(w[0].window_s, w[1].window_s)) {
        return Err(Error::InvalidConfig(format!(
            "window length {} s appears in more than one set",
            w[0].window_s
        )));
    }
    Ok(GroundTruthCurve { points })
}

/// One predicted point checked against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointComparison {
    pub window_s: f64,
    pub true_pct: f64,
    pub pred_pct: f64,
    pub abs_err_pp: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub covered: bool,
    /// Which modeled curve (repetition or set) the entry belongs to.
    pub repetition: usize,
}

/// Compare a predicted curve with the truth on an identical window grid.
pub fn compare(pred: &PerformanceCurve, truth: &GroundTruthCurve) -> Result<Vec<PointComparison>> {
    compare_points(&pred.points, truth, 0)
}

fn compare_points(points: &[CurvePoint], truth: &GroundTruthCurve, repetition: usize) -> Result<Vec<PointComparison>> {
    for t in &truth.points {
        if !points.iter().any(|p| same_window(p.window_s, t.window_s)) {
            return Err(Error::GridMismatch { window_s: t.window_s });
        }
    }
    points
        .iter()
        .map(|p| {
            let true_pct = truth
                .accuracy_at(p.window_s)
                .ok_or(Error::GridMismatch { window_s: p.window_s })?;
            Ok(PointComparison {
                window_s: p.window_s,
                true_pct,
                pred_pct: p.accuracy_pct,
                abs_err_pp: (true_pct - p.accuracy_pct).abs(),
                ci_low: p.ci_low_pct,
                ci_high: p.ci_high_pct,
                covered: p.ci_low_pct <= true_pct && true_pct <= p.ci_high_pct,
                repetition,
            })
        })
        .collect()
}

/// Aggregated comparison over one or more modeled curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_point: Vec<PointComparison>,
    pub mae_pp: f64,
    /// Sample standard deviation of the absolute errors.
    pub std_err_pp: f64,
    pub coverage_pct: f64,
    pub n_repetitions: usize,
    pub baseline_window_s: f64,
    pub estimation_minutes: f64,
}

impl EvaluationReport {
    pub fn from_entries(
        per_point: Vec<PointComparison>,
        n_repetitions: usize,
        baseline_window_s: f64,
        estimation_minutes: f64,
    ) -> Result<Self> {
        if per_point.is_empty() {
            return Err(Error::EmptySet);
        }
        let n = per_point.len() as f64;
        let mae_pp = per_point.iter().map(|p| p.abs_err_pp).sum::<f64>() / n;
        let std_err_pp = if per_point.len() > 1 {
            (per_point.iter().map(|p| (p.abs_err_pp - mae_pp).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let covered = per_point.iter().filter(|p| p.covered).count();
        Ok(Self {
            coverage_pct: 100.0 * covered as f64 / n,
            per_point,
            mae_pp,
            std_err_pp,
            n_repetitions,
            baseline_window_s,
            estimation_minutes,
        })
    }

    /// Mean absolute error at one window length over all repetitions.
    pub fn mae_at(&self, window_s: f64) -> Option<f64> {
        let errs: Vec<f64> = self
            .per_point
            .iter()
            .filter(|p| same_window(p.window_s, window_s))
            .map(|p| p.abs_err_pp)
            .collect();
        (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
    }

    /// Mean predicted accuracy at one window length over all repetitions.
    pub fn mean_pred_at(&self, window_s: f64) -> Option<f64> {
        let preds: Vec<f64> = self
            .per_point
            .iter()
            .filter(|p| same_window(p.window_s, window_s))
            .map(|p| p.pred_pct)
            .collect();
        (!preds.is_empty()).then(|| preds.iter().sum::<f64>() / preds.len() as f64)
    }
}

/// How several modeled curves are compared with the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Every curve is compared on its own.
    #[default]
    PerSet,
    /// Curves are averaged point by point first.
    Mean,
}

/// Pointwise unweighted mean of curves on a common grid.
pub fn average_curves(curves: &[PerformanceCurve]) -> Result<PerformanceCurve> {
    let first = curves.first().ok_or(Error::EmptySet)?;
    let n = curves.len() as f64;
    let mut points = first.points.clone();
    for c in &curves[1..] {
        if c.points.len() != points.len() {
            return Err(Error::GridMismatch {
                window_s: c.points.last().map_or(f64::NAN, |p| p.window_s),
            });
        }
        for (acc, p) in points.iter_mut().zip(&c.points) {
            if !same_window(acc.window_s, p.window_s) {
                return Err(Error::GridMismatch { window_s: p.window_s });
            }
            acc.accuracy_pct += p.accuracy_pct;
            acc.ci_low_pct += p.ci_low_pct;
            acc.ci_high_pct += p.ci_high_pct;
        }
    }
    for p in &mut points {
        p.accuracy_pct /= n;
        p.ci_low_pct /= n;
        p.ci_high_pct /= n;
    }
    Ok(PerformanceCurve {
        points,
        ..first.clone()
    })
}

/// Pointwise unweighted mean of ground-truth curves on a common grid.
pub fn average_truth(curves: &[GroundTruthCurve]) -> Result<GroundTruthCurve> {
    let first = curves.first().ok_or(Error::EmptySet)?;
    let mut points = first.points.clone();
    for c in &curves[1..] {
        for p in &mut points {
            let other = c
                .points
                .iter()
                .find(|q| same_window(q.window_s, p.window_s))
                .ok_or(Error::GridMismatch { window_s: p.window_s })?;
            p.accuracy_pct += other.accuracy_pct;
            p.n_decisions += other.n_decisions;
            p.n_correct += other.n_correct;
        }
        if c.points.len() != points.len() {
            return Err(Error::GridMismatch {
                window_s: c.points[0].window_s,
            });
        }
    }
    for p in &mut points {
        p.accuracy_pct /= curves.len() as f64;
    }
    Ok(GroundTruthCurve { points })
}

/// Evaluate a set of modeled curves against one truth.
pub fn evaluate_curves(
    preds: &[PerformanceCurve],
    truth: &GroundTruthCurve,
    aggregation: Aggregation,
    estimation_minutes: f64,
) -> Result<EvaluationReport> {
    let first = preds.first().ok_or(Error::EmptySet)?;
    let entries = match aggregation {
        Aggregation::PerSet => {
            let mut all = Vec::new();
            for (i, c) in preds.iter().enumerate() {
                all.extend(compare_points(&c.points, truth, i)?);
            }
            all
        }
        Aggregation::Mean => compare(&average_curves(preds)?, truth)?,
    };
    EvaluationReport::from_entries(entries, preds.len(), first.baseline_window_s, estimation_minutes)
}

/// Repeated random subsets of a pool, modeled and compared with the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleConfig {
    pub n_repetitions: usize,
    pub ci: CiConfig,
}

/// Subset of `m` pairs drawn without replacement; the pool itself when `m`
/// covers it.
fn draw_subset(pool: &LabeledCorrelationSet, m: usize, seed: u64, path: &[u64]) -> Result<LabeledCorrelationSet> {
    if m == pool.len() {
        return Ok(pool.clone());
    }
    let mut rng = rng::stream(seed, path);
    let picked = rand::seq::index::sample(&mut rng, pool.len(), m);
    pool.with_pairs(picked.iter().map(|i| pool.pairs()[i]).collect())
}

/// For each amount of estimation data, model `n_repetitions` random subsets
/// of the pool and compare with the fixed ground truth. One report per entry
/// of `minutes_grid`.
pub fn subsample_experiment(
    pool: &LabeledCorrelationSet,
    truth: &GroundTruthCurve,
    minutes_grid: &[f64],
    targets: &[f64],
    cfg: &SubsampleConfig,
) -> Result<Vec<EvaluationReport>> {
    let participant = Participant {
        pool: pool.clone(),
        truth: truth.clone(),
    };
    subsample_participants(
        std::slice::from_ref(&participant),
        minutes_grid,
        targets,
        cfg,
        Aggregation::PerSet,
    )
}

/// Estimation pool and ground truth of one independent subject.
#[derive(Debug, Clone, PartialEq)]
pub struct Participant {
    pub pool: LabeledCorrelationSet,
    pub truth: GroundTruthCurve,
}

/// [`subsample_experiment`] over several participants. Every repetition
/// draws a fresh subset per participant; with [`Aggregation::Mean`] the
/// modeled curves and the truths are averaged across participants before
/// the comparison, otherwise each participant is compared on its own.
pub fn subsample_participants(
    participants: &[Participant],
    minutes_grid: &[f64],
    targets: &[f64],
    cfg: &SubsampleConfig,
    aggregation: Aggregation,
) -> Result<Vec<EvaluationReport>> {
    if cfg.n_repetitions == 0 {
        return Err(Error::InvalidConfig("n_repetitions must be at least 1".into()));
    }
    let first = participants.first().ok_or(Error::EmptySet)?;
    let targets = sorted_targets(targets)?;
    let mean_truth = match aggregation {
        Aggregation::Mean => Some(average_truth(
            &participants.iter().map(|p| p.truth.clone()).collect::<Vec<_>>(),
        )?),
        Aggregation::PerSet => None,
    };
    minutes_grid
        .iter()
        .enumerate()
        .map(|(ci, &minutes)| {
            let mut entries = Vec::new();
            for rep in 0..cfg.n_repetitions {
                let mut curves = Vec::with_capacity(participants.len());
                for (pi, part) in participants.iter().enumerate() {
                    let pool = &part.pool;
                    let m = windows_in_minutes(minutes, pool.window_s());
                    if m > pool.len() {
                        return Err(Error::InsufficientPool {
                            available: pool.len(),
                            requested: m,
                        });
                    }
                    if m < 2 {
                        return Err(Error::TooFewSamples { got: m, need: 2 });
                    }
                    let path = [ci as u64, rep as u64, pi as u64];
                    let subset = draw_subset(pool, m, cfg.ci.seed, &[rng::tag::SUBSAMPLE, path[0], path[1], path[2]])?;
                    let ci_cfg = CiConfig {
                        seed: rng::derive_seed(cfg.ci.seed, &[rng::tag::CI_SEED, path[0], path[1], path[2]]),
                        ..cfg.ci
                    };
                    let curve = model_curve(&subset, &targets, &ci_cfg)?;
                    if mean_truth.is_none() {
                        entries.extend(compare_points(&curve.points, &part.truth, rep)?);
                    }
                    curves.push(curve);
                }
                if let Some(truth) = &mean_truth {
                    entries.extend(compare_points(&average_curves(&curves)?.points, truth, rep)?);
                }
            }
            EvaluationReport::from_entries(entries, cfg.n_repetitions, first.pool.window_s(), minutes)
        })
        .collect()
}

/// One [`subsample_experiment`] per baseline window, each drawing `minutes`
/// of estimation data from the pool at that window.
pub fn baseline_sweep(
    pools: &[LabeledCorrelationSet],
    truth: &GroundTruthCurve,
    baselines: &[f64],
    targets: &[f64],
    minutes: f64,
    cfg: &SubsampleConfig,
) -> Result<Vec<EvaluationReport>> {
    baselines
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let pool = pools
                .iter()
                .find(|p| same_window(p.window_s(), b))
                .ok_or(Error::MissingPool { window_s: b })?;
            let cfg = SubsampleConfig {
                ci: CiConfig {
                    seed: rng::derive_seed(cfg.ci.seed, &[rng::tag::CI_SEED, u64::MAX, i as u64]),
                    ..cfg.ci
                },
                ..*cfg
            };
            Ok(subsample_experiment(pool, truth, &[minutes], targets, &cfg)?.remove(0))
        })
        .collect()
}

/// The target farthest from `baseline` in log-window distance. Ties go to
/// the shorter window.
pub fn farthest_target(baseline: f64, targets: &[f64]) -> Option<f64> {
    let dist = |t: f64| (t / baseline).ln().abs();
    targets.iter().copied().fold(None, |best: Option<f64>, t| match best {
        Some(b) if dist(b) > dist(t) || (dist(b) == dist(t) && b < t) => Some(b),
        _ => Some(t),
    })
}
