//! CSV and SVG artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::{cell_label, report_curves, ExperimentReport, ModelKind, ReconstructionError, Series};

pub const CURVES_HEADER: [&str; 3] = ["x", "y", "series"];
pub const REPORT_HEADER: [&str; 6] = ["tau", "side", "model", "refined", "mse", "cusps"];
pub const METRICS_HEADER: [&str; 15] = [
    "tau",
    "side",
    "model",
    "refined",
    "mse_model",
    "mse_data",
    "mse_truth",
    "rms_fit",
    "cusps",
    "offset_regular",
    "orientation_inversions",
    "degenerate",
    "dropped",
    "cg_residual",
    "error",
];

/// Full-precision decimal: 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    let io = |e: csv::Error| Error::io(path, e);
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_curves_csv(path: &Path, curves: &[Series]) -> Result<()> {
    let rows = curves.iter().flat_map(|s| {
        s.points
            .iter()
            .map(move |&(x, y)| vec![fmt_real(x), fmt_real(y), s.name.clone()])
    });
    write_rows(path, &CURVES_HEADER, rows)
}

/// One row per `(τ, side, model, refined)`; `mse` is the model-relative error.
pub fn write_report_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut rows = Vec::new();
    for cell in &report.cells {
        for mc in &cell.models {
            for refined in [true, false] {
                let (mse, cusps) = match &mc.outcome {
                    Ok(m) => {
                        let e = if refined { m.refined_error } else { m.unrefined_error };
                        (fmt_real(e.mse_model), m.cusps.len().to_string())
                    }
                    Err(_) => (fmt_real(f64::NAN), String::new()),
                };
                rows.push(vec![
                    fmt_real(cell.tau),
                    cell.side.to_string(),
                    mc.model.to_string(),
                    refined.to_string(),
                    mse,
                    cusps,
                ]);
            }
        }
    }
    write_rows(path, &REPORT_HEADER, rows)
}

pub fn write_metrics_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut rows = Vec::new();
    for cell in &report.cells {
        for mc in &cell.models {
            for refined in [true, false] {
                let mut row = vec![
                    fmt_real(cell.tau),
                    cell.side.to_string(),
                    mc.model.to_string(),
                    refined.to_string(),
                ];
                match &mc.outcome {
                    Ok(m) => {
                        let e: ReconstructionError = if refined { m.refined_error } else { m.unrefined_error };
                        row.extend([
                            fmt_real(e.mse_model),
                            fmt_real(e.mse_data),
                            e.mse_truth.map(fmt_real).unwrap_or_default(),
                            fmt_real(e.rms_fit),
                            m.cusps.len().to_string(),
                            m.offset_regular().to_string(),
                            m.orientation_inversions.to_string(),
                            m.refinement.degenerate().len().to_string(),
                            e.dropped.to_string(),
                            fmt_real(m.refinement.cg_residual),
                            String::new(),
                        ]);
                    }
                    Err(err) => {
                        row.extend(std::iter::repeat(String::new()).take(10));
                        row.push(err.to_string());
                    }
                }
                rows.push(row);
            }
        }
    }
    write_rows(path, &METRICS_HEADER, rows)
}

/// Paths written by [`export_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub curves: PathBuf,
    pub report: PathBuf,
    pub metrics: PathBuf,
    pub figure: PathBuf,
}

/// Writes `curves.csv`, `report.csv`, `metrics.csv` and `figure.svg` into `dir`.
pub fn export_report(report: &ExperimentReport, dir: &Path) -> Result<Artifacts> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let out = Artifacts {
        curves: dir.join("curves.csv"),
        report: dir.join("report.csv"),
        metrics: dir.join("metrics.csv"),
        figure: dir.join("figure.svg"),
    };
    write_curves_csv(&out.curves, &report_curves(report)?)?;
    write_report_csv(&out.report, report)?;
    write_metrics_csv(&out.metrics, report)?;
    render_svg(&figure_series(report)?, &data_points(report), &out.figure)?;
    Ok(out)
}

pub fn data_points(report: &ExperimentReport) -> Vec<(f64, f64)> {
    let d = &report.prepared.dataset;
    d.xs().iter().copied().zip(d.ys().iter().copied()).collect()
}

/// The first model's generator with its offsets and bi-offsets.
pub fn figure_series(report: &ExperimentReport) -> Result<Vec<Series>> {
    let all = report_curves(report)?;
    let Some(first) = report.prepared.models.first() else {
        return Ok(Vec::new());
    };
    let kind: ModelKind = first.kind;
    let mut wanted = vec![kind.name().to_string()];
    for cell in &report.cells {
        for part in ["offset", "bioffset"] {
            wanted.push(cell_label(kind, part, cell.side, cell.tau));
        }
    }
    Ok(wanted
        .iter()
        .filter_map(|w| all.iter().find(|s| &s.name == w).cloned())
        .collect())
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 240.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 3] = ["", "6 3", "2 2"];

/// Evenly spaced "nice" tick values covering `[lo, hi]`, and the number of
/// decimals needed to print them.
fn ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let values = (first..=last).map(|k| k as f64 * step).collect();
    (values, decimals)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
        let pad = 0.5 * (1.0 + lo.abs());
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Static SVG plot of polylines and point markers with axes and a legend.
pub fn svg_document(curves: &[Series], points: &[(f64, f64)]) -> String {
    let all = || curves.iter().flat_map(|s| s.points.iter()).chain(points.iter());
    let (x0, x1) = bounds(all().map(|p| p.0));
    let (y0, y1) = bounds(all().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );

    let (xt, xd) = ticks(x0, x1, 8);
    for t in xt {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.xd$}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0
        );
    }
    let (yt, yd) = ticks(y0, y1, 6);
    for t in yt {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t:.yd$}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">x</text><text x="20" y="{:.2}" text-anchor="middle">y</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        TOP + ph / 2.0
    );

    for (i, series) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = DASHES[(i / COLORS.len()) % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let coords: Vec<String> = series
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash_attr}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 25.0,
            lx + 30.0,
            ly + 4.0,
            escape(&series.name)
        );
    }
    if !points.is_empty() {
        for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black"/>"#, px(x), py(y));
        }
        let ly = TOP + 10.0 + 16.0 * curves.len() as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{ly:.2}" r="2.5" fill="black"/><text x="{:.2}" y="{:.2}">data</text>"#,
            lx + 12.5,
            lx + 30.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_svg(curves: &[Series], points: &[(f64, f64)], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, svg_document(curves, points)).map_err(|e| Error::io(path, e))
}
