//! Standalone SVG rendering of a performance curve.

use crate::error::{CliError, CliResult};
use aadcurve::CurvePoint;
use clap::ValueEnum;
use std::fmt::Write;

pub const Y_MIN: f64 = 45.0;
pub const Y_MAX: f64 = 100.0;
pub const CHANCE_PCT: f64 = 50.0;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum XAxis {
    /// Window lengths as evenly spaced categories, longest first.
    #[default]
    Descending,
    /// Logarithmic seconds, shortest on the left.
    Log,
}

struct Frame {
    windows: Vec<f64>,
    axis: XAxis,
}

impl Frame {
    fn x(&self, w: f64) -> f64 {
        let pw = WIDTH - LEFT - RIGHT;
        match self.axis {
            XAxis::Descending => {
                let i = self.windows.iter().position(|&v| v == w).unwrap_or(0) as f64;
                LEFT + (i + 0.5) / self.windows.len() as f64 * pw
            }
            XAxis::Log => {
                let (lo, hi) = (self.windows[self.windows.len() - 1].ln(), self.windows[0].ln());
                if hi == lo {
                    LEFT + pw / 2.0
                } else {
                    LEFT + (w.ln() - lo) / (hi - lo) * pw
                }
            }
        }
    }

    fn y(&self, pct: f64) -> f64 {
        let ph = HEIGHT - TOP - BOTTOM;
        TOP + (Y_MAX - pct.clamp(Y_MIN, Y_MAX)) / (Y_MAX - Y_MIN) * ph
    }
}

fn coords<I: IntoIterator<Item = (f64, f64)>>(pts: I) -> String {
    pts.into_iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Compact tick label for a window length.
fn seconds_label(w: f64) -> String {
    let s = format!("{w:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render_svg(curve: &[CurvePoint], truth: Option<&[(f64, f64)]>, axis: XAxis) -> CliResult<String> {
    if curve.is_empty() {
        return Err(CliError::input("curve has no points"));
    }
    let mut pts = curve.to_vec();
    pts.sort_by(|a, b| b.window_s.total_cmp(&a.window_s));
    let mut truth: Vec<(f64, f64)> = truth.map(<[_]>::to_vec).unwrap_or_default();
    truth.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut windows: Vec<f64> = pts
        .iter()
        .map(|p| p.window_s)
        .chain(truth.iter().map(|t| t.0))
        .collect();
    windows.sort_by(|a, b| b.total_cmp(a));
    windows.dedup();
    for series in [
        pts.iter().map(|p| p.window_s).collect::<Vec<_>>(),
        truth.iter().map(|t| t.0).collect(),
    ] {
        if let Some(w) = series.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::input(format!("window length {} s appears twice", w[0])));
        }
    }
    let f = Frame { windows, axis };

    let mut s = String::new();
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    )
    .unwrap();

    for pct in [50.0, 60.0, 70.0, 80.0, 90.0, 100.0] {
        let y = f.y(pct);
        writeln!(
            s,
            r##"<line class="grid" x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{pct:.0}</text>"#,
            x0 - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for &w in &f.windows {
        let x = f.x(w);
        writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 18.0,
            seconds_label(w)
        )
        .unwrap();
    }
    writeln!(
        s,
        r##"<rect class="axes" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000000"/>"##,
        x1 - x0,
        y1 - y0
    )
    .unwrap();
    let yc = f.y(CHANCE_PCT);
    writeln!(
        s,
        r##"<line class="chance" x1="{x0:.2}" y1="{yc:.2}" x2="{x1:.2}" y2="{yc:.2}" stroke="#888888" stroke-dasharray="6 4"/>"##
    )
    .unwrap();

    let upper = pts.iter().map(|p| (f.x(p.window_s), f.y(p.ci_high_pct)));
    let lower = pts.iter().rev().map(|p| (f.x(p.window_s), f.y(p.ci_low_pct)));
    writeln!(
        s,
        r##"<polygon class="ci-band" points="{}" fill="#1f77b4" fill-opacity="0.2" stroke="none"/>"##,
        coords(upper.chain(lower))
    )
    .unwrap();
    writeln!(
        s,
        r##"<polyline class="predicted" points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        coords(pts.iter().map(|p| (f.x(p.window_s), f.y(p.accuracy_pct))))
    )
    .unwrap();
    if !truth.is_empty() {
        writeln!(
            s,
            r##"<polyline class="truth" points="{}" fill="none" stroke="#d62728" stroke-width="2" stroke-dasharray="4 3"/>"##,
            coords(truth.iter().map(|&(w, a)| (f.x(w), f.y(a))))
        )
        .unwrap();
    }
    for p in &pts {
        let (x, y) = (f.x(p.window_s), f.y(p.accuracy_pct));
        writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#1f77b4"/>"##).unwrap();
        writeln!(
            s,
            r#"<text class="value" x="{x:.2}" y="{:.2}" text-anchor="middle">{:.1}</text>"#,
            y - 8.0,
            p.accuracy_pct
        )
        .unwrap();
    }

    let xlabel = match axis {
        XAxis::Descending => "decision window length [s]",
        XAxis::Log => "decision window length [s, log scale]",
    };
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">accuracy [%]</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();
    let mut legend = vec![("#1f77b4", "predicted (CI band)")];
    if !truth.is_empty() {
        legend.push(("#d62728", "ground truth"));
    }
    for (i, (color, label)) in legend.iter().enumerate() {
        let y = HEIGHT - 6.0;
        let x = x0 + 200.0 * i as f64;
        writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" fill="{color}">{label}</text>"#).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}
