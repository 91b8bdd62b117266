//! File formats.
//!
//! Correlation CSV: header `r_att,r_unatt`, one pair per row. Extra columns
//! after the first two are accepted and ignored. Window length and sampling
//! rate come from flags or from a sidecar `<name>.meta.json`.
//!
//! Curve CSV: header `window_s,accuracy_pct,ci_low_pct,ci_high_pct`.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`.

use crate::error::{CliError, CliResult};
use aadcurve::evaluation::{GroundTruthCurve, TruthPoint};
use aadcurve::{CorrelationPair, CurvePoint, SyntheticScenario};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const CORRELATION_HEADER: [&str; 2] = ["r_att", "r_unatt"];
pub const CURVE_HEADER: [&str; 4] = ["window_s", "accuracy_pct", "ci_low_pct", "ci_high_pct"];
pub const TRUTH_HEADER: [&str; 4] = ["window_s", "accuracy_pct", "n_decisions", "n_correct"];

/// Contents of a `.meta.json` sidecar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fs_hz: Option<f64>,
    /// `estimation` or `ground_truth` for simulated files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_windows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<SyntheticScenario>,
}

/// `data.csv` -> `data.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

pub fn read_meta(csv: &Path) -> CliResult<Option<Meta>> {
    let path = sidecar_path(csv);
    if !path.exists() {
        return Ok(None);
    }
    let text = read_text(&path)?;
    serde_json::from_str(&text).map(Some).map_err(|e| {
        CliError::input(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Numeric rows of a CSV whose header starts with `header`. Each row is
/// returned with its 1-based line number.
fn read_table(path: &Path, header: &[&str]) -> CliResult<Vec<(u64, Vec<f64>)>> {
    let text = read_text(path)?;
    let here = |line: u64, msg: String| CliError::input(format!("{}: row {line}{msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = rdr
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        .clone();
    if found.iter().all(str::is_empty) {
        return Err(CliError::input(format!(
            "{}: empty file, expected header {}",
            path.display(),
            header.join(",")
        )));
    }
    for (col, name) in header.iter().enumerate() {
        if found.get(col) != Some(*name) {
            return Err(here(
                1,
                format!(
                    ", column {}: expected header {}, found {:?}",
                    col + 1,
                    header.join(","),
                    found.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => here(pos.line(), format!(": {}", e.kind_message())),
            None => CliError::input(format!("{}: {e}", path.display())),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let values = header
            .iter()
            .enumerate()
            .map(|(col, name)| {
                let field = record.get(col).unwrap_or("");
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(here(
                        line,
                        format!(
                            ", column {} ({name}): cannot read {field:?} as a finite number",
                            col + 1
                        ),
                    )),
                }
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

trait KindMessage {
    fn kind_message(&self) -> String;
}

impl KindMessage for csv::Error {
    fn kind_message(&self) -> String {
        match self.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("found {len} fields, expected {expected_len}")
            }
            csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
            _ => self.to_string(),
        }
    }
}

pub fn read_correlations(path: &Path) -> CliResult<Vec<CorrelationPair>> {
    read_table(path, &CORRELATION_HEADER)?
        .into_iter()
        .map(|(line, v)| {
            for (col, &r) in v.iter().enumerate() {
                if !(-1.0..=1.0).contains(&r) {
                    return Err(CliError::input(format!(
                        "{}: row {line}, column {} ({}): correlation {r} outside [-1, 1]",
                        path.display(),
                        col + 1,
                        CORRELATION_HEADER[col]
                    )));
                }
            }
            Ok(CorrelationPair::new(v[0], v[1]))
        })
        .collect()
}

pub fn read_curve(path: &Path) -> CliResult<Vec<CurvePoint>> {
    let points: Vec<CurvePoint> = read_table(path, &CURVE_HEADER)?
        .into_iter()
        .map(|(line, v)| {
            let p = CurvePoint {
                window_s: v[0],
                accuracy_pct: v[1],
                ci_low_pct: v[2],
                ci_high_pct: v[3],
            };
            if !(p.window_s > 0.0) {
                return Err(CliError::input(format!(
                    "{}: row {line}, column 1 (window_s): window length must be positive",
                    path.display()
                )));
            }
            for (col, x) in [(2, p.accuracy_pct), (3, p.ci_low_pct), (4, p.ci_high_pct)] {
                if !(0.0..=100.0).contains(&x) {
                    return Err(CliError::input(format!(
                        "{}: row {line}, column {col} ({}): {x} is not a percentage",
                        path.display(),
                        CURVE_HEADER[col - 1]
                    )));
                }
            }
            Ok(p)
        })
        .collect::<CliResult<_>>()?;
    Ok(points)
}

/// Ground-truth curve CSV. Only `window_s,accuracy_pct` are required, so a
/// curve CSV also reads as a truth curve.
pub fn read_truth_curve(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    read_table(path, &TRUTH_HEADER[..2])?
        .into_iter()
        .map(|(line, v)| {
            if !(v[0] > 0.0) || !(0.0..=100.0).contains(&v[1]) {
                return Err(CliError::input(format!(
                    "{}: row {line}: window must be positive and accuracy within [0, 100]",
                    path.display()
                )));
            }
            Ok((v[0], v[1]))
        })
        .collect()
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_text<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii output")
}

pub fn correlations_csv(pairs: &[CorrelationPair]) -> String {
    csv_text(
        &CORRELATION_HEADER,
        pairs.iter().map(|p| [num(p.r_att), num(p.r_unatt)]),
    )
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    csv_text(
        &CURVE_HEADER,
        points.iter().map(|p| {
            [
                num(p.window_s),
                num(p.accuracy_pct),
                num(p.ci_low_pct),
                num(p.ci_high_pct),
            ]
        }),
    )
}

pub fn truth_csv(truth: &GroundTruthCurve) -> String {
    csv_text(
        &TRUTH_HEADER,
        truth.points.iter().map(|p: &TruthPoint| {
            [
                num(p.window_s),
                num(p.accuracy_pct),
                p.n_decisions.to_string(),
                p.n_correct.to_string(),
            ]
        }),
    )
}

pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Write every output, or none if a target directory is missing.
pub fn write_all(outputs: &[(PathBuf, String)]) -> CliResult<()> {
    for (path, _) in outputs {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
        if let Some(dir) = dir {
            if !dir.is_dir() {
                return Err(CliError::input(format!("{}: directory does not exist", dir.display())));
            }
        }
    }
    for (path, text) in outputs {
        fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
