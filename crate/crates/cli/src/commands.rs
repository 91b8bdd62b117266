//! Subcommands and their flags.

use crate::error::{CliError, CliResult};
use crate::io::{self, Meta};
use crate::plot::{self, XAxis};
use aadcurve::evaluation::{
    average_curves, average_truth, compare, ground_truth_curve, Aggregation, EvaluationReport, GroundTruthCurve,
    PointComparison,
};
use aadcurve::model::fit_curve;
use aadcurve::synthetic::{labeled_set, truth_set, windows_in_minutes};
use aadcurve::{
    CiConfig, CurvePoint, DecisionVariableModel, GeneratorMode, LabeledCorrelationSet, PerformanceCurve,
    SyntheticScenario,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Predict AAD accuracy across decision window lengths from labeled
/// correlations measured at one window length.
#[derive(Debug, Parser)]
#[command(name = "aadcurve", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model the performance curve from a correlation CSV.
    Predict(PredictArgs),
    /// Write synthetic labeled correlations with known ground truth.
    Simulate(SimulateArgs),
    /// Compare predicted curves with ground-truth correlations.
    Evaluate(EvaluateArgs),
    /// Render a curve CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Correlation CSV with header `r_att,r_unatt`.
    #[arg(long)]
    pub input: PathBuf,
    /// Baseline window length in seconds. Overrides the sidecar.
    #[arg(long)]
    pub window_s: Option<f64>,
    /// Sampling rate in Hz. Overrides the sidecar.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Target window lengths in seconds.
    #[arg(long, value_delimiter = ',', default_value = "60,30,20,10,5,1")]
    pub targets: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n_boot: usize,
    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    pub ci: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Curve CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report; defaults to the curve path with a `.json` extension.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Signal,
    Correlation,
}

impl From<ModeArg> for GeneratorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Signal => GeneratorMode::SignalLevel,
            ModeArg::Correlation => GeneratorMode::CorrelationLevel,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub rho_att: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub rho_unatt: f64,
    #[arg(long)]
    pub fs: f64,
    #[arg(long)]
    pub window_s: f64,
    /// Amount of data; `floor(60 * minutes / window_s)` windows.
    #[arg(long)]
    pub minutes: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Signal)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw ground-truth windows instead of estimation windows. The two are
    /// independent for the same seed.
    #[arg(long)]
    pub ground_truth: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregateArg {
    PerSet,
    Mean,
}

impl From<AggregateArg> for Aggregation {
    fn from(a: AggregateArg) -> Self {
        match a {
            AggregateArg::PerSet => Aggregation::PerSet,
            AggregateArg::Mean => Aggregation::Mean,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted curve CSV; repeat for several sets.
    #[arg(long = "pred", required = true)]
    pub preds: Vec<PathBuf>,
    /// Comma-separated ground-truth correlation CSVs, one per window length,
    /// each with a sidecar giving `window_s`. Give once to share it across
    /// all predictions, or once per `--pred`.
    #[arg(long = "truth", required = true)]
    pub truths: Vec<String>,
    #[arg(long, value_enum, default_value_t = AggregateArg::PerSet)]
    pub aggregate: AggregateArg,
    /// Sampling rate for truth files whose sidecar lacks one.
    #[arg(long)]
    pub fs: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the ground-truth curve as CSV.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub curve: PathBuf,
    /// Ground-truth curve CSV (`window_s,accuracy_pct,...`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = XAxis::Descending)]
    pub x_axis: XAxis,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Predict(a) => predict(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Plot(a) => plot(&a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictConfig {
    pub input: String,
    pub window_s: f64,
    pub fs_hz: f64,
    pub targets: Vec<f64>,
    pub n_boot: usize,
    pub ci_level: f64,
    pub seed: u64,
    pub total_duration_s: f64,
    pub estimation_minutes: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelEcho {
    pub mu_diff: f64,
    pub sigma_sum_sq: f64,
    pub rho_att: f64,
    pub rho_unatt: f64,
    pub n_baseline: usize,
    pub m_count: usize,
}

impl From<&DecisionVariableModel> for ModelEcho {
    fn from(m: &DecisionVariableModel) -> Self {
        Self {
            mu_diff: m.mu_diff,
            sigma_sum_sq: m.sigma_sum_sq,
            rho_att: m.rho_att,
            rho_unatt: m.rho_unatt,
            n_baseline: m.n_baseline,
            m_count: m.m_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictReport {
    pub config: PredictConfig,
    pub model: ModelEcho,
    pub curve: Vec<CurvePoint>,
    pub warnings: Vec<String>,
}

fn meta_or_default(path: &Path) -> CliResult<Meta> {
    Ok(io::read_meta(path)?.unwrap_or_default())
}

fn required(value: Option<f64>, what: &str, flag: &str, path: &Path) -> CliResult<f64> {
    value.ok_or_else(|| {
        CliError::input(format!(
            "{}: {what} unknown; pass {flag} or add it to {}",
            path.display(),
            io::sidecar_path(path).display()
        ))
    })
}

pub fn predict(a: &PredictArgs) -> CliResult<()> {
    let meta = meta_or_default(&a.input)?;
    let window_s = required(a.window_s.or(meta.window_s), "window_s", "--window-s", &a.input)?;
    let fs_hz = required(a.fs.or(meta.fs_hz), "fs_hz", "--fs", &a.input)?;
    let report_path = a.report.clone().unwrap_or_else(|| a.out.with_extension("json"));
    if report_path == a.out {
        return Err(CliError::input("curve and report paths coincide; pass --report"));
    }
    let ci = CiConfig {
        n_boot: a.n_boot,
        level: a.ci,
        seed: a.seed,
    };
    ci.validate()?;
    let targets = aadcurve::model::sorted_targets(&a.targets)?;

    let pairs = io::read_correlations(&a.input)?;
    let data = LabeledCorrelationSet::new(pairs, window_s, fs_hz)?;
    let fit = fit_curve(&data, &targets, &ci)?;

    let total = data.total_duration_s();
    let mut warnings = Vec::new();
    for (p, r) in fit.curve.points.iter().zip(&fit.intervals) {
        if p.window_s > total {
            warnings.push(format!(
                "target {} s is longer than all {} s of estimation data combined",
                io::num(p.window_s),
                io::num(total)
            ));
        }
        if r.percentile_fallback {
            warnings.push(format!(
                "target {} s: jackknife estimates have no spread, plain percentile interval used",
                io::num(p.window_s)
            ));
        }
        if r.bracket_expanded {
            warnings.push(format!(
                "target {} s: interval widened to contain the point estimate",
                io::num(p.window_s)
            ));
        }
    }

    let report = PredictReport {
        config: PredictConfig {
            input: a.input.display().to_string(),
            window_s,
            fs_hz,
            targets,
            n_boot: ci.n_boot,
            ci_level: ci.level,
            seed: ci.seed,
            total_duration_s: total,
            estimation_minutes: total / 60.0,
        },
        model: ModelEcho::from(&fit.model),
        curve: fit.curve.points.clone(),
        warnings,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    io::write_all(&[
        (a.out.clone(), io::curve_csv(&fit.curve.points)),
        (report_path, io::json_text(&report)),
    ])
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    // Every failure here is a bad request, including too little data.
    let input = |e: aadcurve::Error| CliError::input(e.to_string());
    if !(a.minutes > 0.0 && a.minutes.is_finite()) {
        return Err(CliError::input(format!("minutes must be positive, got {}", a.minutes)));
    }
    let scn = SyntheticScenario {
        rho_att: a.rho_att,
        rho_unatt: a.rho_unatt,
        fs_hz: a.fs,
        duration_s: 60.0 * a.minutes,
        seed: a.seed,
        mode: a.mode.into(),
    };
    scn.validate().map_err(input)?;
    let (set, role) = if a.ground_truth {
        let n = windows_in_minutes(a.minutes, a.window_s);
        if n == 0 {
            return Err(input(aadcurve::Error::TooFewSamples { got: 0, need: 1 }));
        }
        (truth_set(&scn, a.window_s, n).map_err(input)?, "ground_truth")
    } else {
        (labeled_set(&scn, a.window_s, a.minutes).map_err(input)?, "estimation")
    };
    let meta = Meta {
        window_s: Some(a.window_s),
        fs_hz: Some(a.fs),
        role: Some(role.to_string()),
        n_windows: Some(set.len()),
        scenario: Some(scn),
    };
    io::write_all(&[
        (a.out.clone(), io::correlations_csv(set.pairs())),
        (io::sidecar_path(&a.out), io::json_text(&meta)),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateConfig {
    pub pred: Vec<String>,
    pub truth: Vec<Vec<String>>,
    pub aggregate: Aggregation,
}

/// One row of the comparison table: true and predicted accuracy per window,
/// then the error summary of that row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub label: String,
    pub window_s: Vec<f64>,
    pub true_pct: Vec<f64>,
    pub pred_pct: Vec<f64>,
    pub mean_abs_err_pp: f64,
    pub std_abs_err_pp: f64,
    pub in_ci_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateOutput {
    pub config: EvaluateConfig,
    pub rows: Vec<TableRow>,
    #[serde(flatten)]
    pub report: EvaluationReport,
}

fn truth_group(list: &str, fs: Option<f64>) -> CliResult<(Vec<String>, GroundTruthCurve)> {
    let files: Vec<String> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    if files.is_empty() {
        return Err(CliError::input("empty --truth list"));
    }
    let sets = files
        .iter()
        .map(|f| {
            let path = Path::new(f);
            let meta = meta_or_default(path)?;
            let window_s = required(meta.window_s, "window_s", "a sidecar", path)?;
            let fs_hz = required(fs.or(meta.fs_hz), "fs_hz", "--fs", path)?;
            Ok(LabeledCorrelationSet::new(
                io::read_correlations(path)?,
                window_s,
                fs_hz,
            )?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok((files, ground_truth_curve(&sets)?))
}

fn load_pred(path: &Path) -> CliResult<(PerformanceCurve, Option<PredictConfig>)> {
    let mut points = io::read_curve(path)?;
    points.sort_by(|a, b| b.window_s.total_cmp(&a.window_s));
    // The sibling report written by `predict`, when present.
    let config = std::fs::read_to_string(path.with_extension("json"))
        .ok()
        .and_then(|t| serde_json::from_str::<PredictReport>(&t).ok())
        .map(|r| r.config);
    let curve = PerformanceCurve {
        points,
        baseline_window_s: config.as_ref().map_or(f64::NAN, |c| c.window_s),
        fs_hz: config.as_ref().map_or(f64::NAN, |c| c.fs_hz),
        bootstrap_samples: config.as_ref().map_or(0, |c| c.n_boot),
        ci_level: config.as_ref().map_or(f64::NAN, |c| c.ci_level),
    };
    Ok((curve, config))
}

fn table_row(label: String, entries: &[PointComparison]) -> CliResult<TableRow> {
    let r = EvaluationReport::from_entries(entries.to_vec(), 1, f64::NAN, f64::NAN)?;
    Ok(TableRow {
        label,
        window_s: entries.iter().map(|e| e.window_s).collect(),
        true_pct: entries.iter().map(|e| e.true_pct).collect(),
        pred_pct: entries.iter().map(|e| e.pred_pct).collect(),
        mean_abs_err_pp: r.mae_pp,
        std_abs_err_pp: r.std_err_pp,
        in_ci_pct: r.coverage_pct,
    })
}

/// Value shared by every prediction, NaN when they disagree or are unknown.
fn common(values: impl Iterator<Item = Option<f64>>) -> f64 {
    let v: Vec<Option<f64>> = values.collect();
    match v.first() {
        Some(Some(x)) if v.iter().all(|y| *y == Some(*x)) => *x,
        _ => f64::NAN,
    }
}

pub fn evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let aggregation: Aggregation = a.aggregate.into();
    let groups = a
        .truths
        .iter()
        .map(|t| truth_group(t, a.fs))
        .collect::<CliResult<Vec<_>>>()?;
    if groups.len() != 1 && groups.len() != a.preds.len() {
        return Err(CliError::input(format!(
            "{} --truth groups for {} --pred files; give one shared group or one per prediction",
            groups.len(),
            a.preds.len()
        )));
    }
    let preds = a.preds.iter().map(|p| load_pred(p)).collect::<CliResult<Vec<_>>>()?;
    let labels: Vec<String> = a.preds.iter().map(|p| p.display().to_string()).collect();
    let truths: Vec<GroundTruthCurve> = groups.iter().map(|g| g.1.clone()).collect();

    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mean_truth = average_truth(&truths)?;
    match aggregation {
        Aggregation::PerSet => {
            for (i, (curve, _)) in preds.iter().enumerate() {
                let truth = &truths[i.min(truths.len() - 1)];
                let mut e = compare(curve, truth)?;
                e.iter_mut().for_each(|p| p.repetition = i);
                rows.push(table_row(labels[i].clone(), &e)?);
                entries.extend(e);
            }
        }
        Aggregation::Mean => {
            let curves: Vec<PerformanceCurve> = preds.iter().map(|p| p.0.clone()).collect();
            let e = compare(&average_curves(&curves)?, &mean_truth)?;
            rows.push(table_row("mean".into(), &e)?);
            entries.extend(e);
        }
    }
    let baseline = common(preds.iter().map(|p| p.1.as_ref().map(|c| c.window_s)));
    let minutes = common(preds.iter().map(|p| p.1.as_ref().map(|c| c.estimation_minutes)));
    let output = EvaluateOutput {
        config: EvaluateConfig {
            pred: labels,
            truth: groups.iter().map(|g| g.0.clone()).collect(),
            aggregate: aggregation,
        },
        rows,
        report: EvaluationReport::from_entries(entries, preds.len(), baseline, minutes)?,
    };
    let mut outputs = vec![(a.out.clone(), io::json_text(&output))];
    if let Some(p) = &a.truth_out {
        outputs.push((p.clone(), io::truth_csv(&mean_truth)));
    }
    io::write_all(&outputs)
}

pub fn plot(a: &PlotArgs) -> CliResult<()> {
    let curve = io::read_curve(&a.curve)?;
    let truth = a.truth.as_deref().map(io::read_truth_curve).transpose()?;
    let svg = plot::render_svg(&curve, truth.as_deref(), a.x_axis)?;
    io::write_all(&[(a.out.clone(), svg)])
}
