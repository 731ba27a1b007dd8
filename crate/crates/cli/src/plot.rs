//! Minimal deterministic SVG line charts from CSV columns.

use std::fmt::Write;

use crate::error::CliError;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 80.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

/// Header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvData {
    /// Parses comma-separated text with one header row. Errors name the
    /// offending 1-based line.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| CliError::Config("CSV is empty".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(CliError::Config(format!(
                    "malformed CSV row at line {}: expected {} fields, found {}",
                    idx + 1,
                    columns.len(),
                    cells.len()
                )));
            }
            let row = cells
                .iter()
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| {
                        CliError::Config(format!("malformed CSV row at line {}: `{}` is not a number", idx + 1, c.trim()))
                    })
                })
                .collect::<Result<Vec<f64>, CliError>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Config(format!("unknown column `{name}` (have: {})", self.columns.join(", "))))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub y2: Option<String>,
    pub hline: Option<f64>,
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Covers `values` (and `extra`) with a little padding; a flat range is
    /// widened so the scale stays finite.
    fn fit(values: &[f64], extra: Option<f64>) -> Self {
        let (mut lo, mut hi) = values
            .iter()
            .chain(extra.iter())
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            let pad = 0.5 * lo.abs().max(1.0);
            (lo, hi) = (lo - pad, hi + pad);
        } else {
            let pad = 0.02 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..TICKS).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (TICKS - 1) as f64).collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn polyline(xs: &[f64], ys: &[f64], xa: &Axis, ya: &Axis, colour: &str, dash: &str) -> String {
    let (pw, ph) = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT, HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{:.2},{:.2}", MARGIN_LEFT + xa.frac(x) * pw, MARGIN_TOP + (1.0 - ya.frac(y)) * ph))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>\n",
        points.join(" ")
    )
}

/// Renders an 800x500 chart. `y` uses the left axis, `y2` the right axis and
/// `hline` is drawn against the left axis.
pub fn render(data: &CsvData, spec: &PlotSpec) -> Result<String, CliError> {
    let xs = data.column(&spec.x)?;
    let ys = data.column(&spec.y)?;
    let y2 = spec.y2.as_deref().map(|c| data.column(c)).transpose()?;
    let (pw, ph) = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT, HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);
    let xa = Axis::fit(&xs, None);
    let ya = Axis::fit(&ys, spec.hline);
    let (x0, x1, y0, y1) = (MARGIN_LEFT, MARGIN_LEFT + pw, MARGIN_TOP, MARGIN_TOP + ph);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(svg, "<rect x=\"{x0}\" y=\"{y0}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>");

    for v in xa.ticks() {
        let px = x0 + xa.frac(v) * pw;
        let _ = writeln!(svg, "<line x1=\"{px:.2}\" y1=\"{y1}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", y1 + 5.0);
        let _ = writeln!(svg, "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", y1 + 20.0, tick_label(v));
    }
    for v in ya.ticks() {
        let py = y0 + (1.0 - ya.frac(v)) * ph;
        let _ = writeln!(svg, "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>", x0 - 5.0);
        let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", x0 - 8.0, py + 4.0, tick_label(v));
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        x0 + pw / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x)
    );
    let _ = writeln!(
        svg,
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">{}</text>",
        y0 + ph / 2.0,
        y0 + ph / 2.0,
        escape(&spec.y)
    );

    if let Some(h) = spec.hline {
        let py = y0 + (1.0 - ya.frac(h)) * ph;
        let _ = writeln!(
            svg,
            "<line x1=\"{x0}\" y1=\"{py:.2}\" x2=\"{x1}\" y2=\"{py:.2}\" stroke=\"grey\" stroke-dasharray=\"6 4\"/>"
        );
    }
    svg.push_str(&polyline(&xs, &ys, &xa, &ya, "#1f77b4", ""));

    if let (Some(values), Some(name)) = (&y2, &spec.y2) {
        let ya2 = Axis::fit(values, None);
        for v in ya2.ticks() {
            let py = y0 + (1.0 - ya2.frac(v)) * ph;
            let _ = writeln!(svg, "<line x1=\"{x1}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>", x1 + 5.0);
            let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"start\">{}</text>", x1 + 8.0, py + 4.0, tick_label(v));
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#d62728\" transform=\"rotate(90 {:.2} {:.2})\">{}</text>",
            WIDTH - 15.0,
            y0 + ph / 2.0,
            WIDTH - 15.0,
            y0 + ph / 2.0,
            escape(name)
        );
        svg.push_str(&polyline(&xs, values, &xa, &ya2, "#d62728", " stroke-dasharray=\"4 2\""));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
