//! Minimal deterministic SVG line charts for the `plot` subcommand.
//!
//! Hand-rolled so chart files are byte-stable across runs and platforms:
//! fixed geometry, fixed palette, fixed float formatting, no timestamps.
//! `<polyline>` elements are reserved for data series — axes, grids, and
//! legends use other primitives — so one plotted series always renders as
//! exactly one polyline.

use std::fmt::Write as _;

/// One plotted line.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Series {
    /// Legend label.
    pub label: String,
    /// Data points; non-finite coordinates are skipped when drawing.
    pub points: Vec<(f64, f64)>,
}

/// Vertical axis scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum YScale {
    /// Plain values.
    Linear,
    /// Values are base-10 logarithms of the plotted quantity; ticks sit on
    /// integer decades and are labelled `1e<k>`.
    Log10,
}

/// A line chart with a title, axis labels, and any number of series.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_scale: YScale,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 784.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 448.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#636363",
];

/// Escape a string for use inside SVG text content or attribute values.
fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Evenly spaced round-valued tick positions covering `[min, max]`.
fn linear_ticks(min: f64, max: f64, target: usize) -> (Vec<f64>, f64) {
    let span = max - min;
    let raw = span / target.max(2) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let mut step = 10.0 * mag;
    for m in [1.0, 2.0, 2.5, 5.0] {
        if span / (m * mag) <= target as f64 {
            step = m * mag;
            break;
        }
    }
    let first = (min / step).ceil() as i64;
    let last = (max / step).floor() as i64;
    let mut ticks = Vec::new();
    for k in first..=last {
        let t = k as f64 * step;
        ticks.push(if t == 0.0 { 0.0 } else { t });
    }
    if ticks.is_empty() {
        ticks = vec![min, max];
    }
    (ticks, step)
}

/// Decimal places needed to print multiples of `step` exactly.
fn step_decimals(step: f64) -> usize {
    let mut d = 0usize;
    let mut s = step.abs();
    while d < 10 {
        if (s - s.round()).abs() < 1e-9 * s.max(1.0) {
            break;
        }
        s *= 10.0;
        d += 1;
    }
    d
}

/// Fixed-precision label for a tick value, with trailing zeros trimmed.
fn tick_label(value: f64, step: f64) -> String {
    let prec = step_decimals(step);
    let mut text = format!("{value:.prec$}");
    if text.contains('.') {
        while text.ends_with('0') {
            text.pop();
        }
        if text.ends_with('.') {
            text.pop();
        }
    }
    if text == "-0" { "0".to_string() } else { text }
}

impl Chart {
    /// Render the chart as a standalone SVG document.
    pub(crate) fn to_svg(&self) -> String {
        // Data ranges over finite points only.
        let finite: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in &finite {
            x_min = x_min.min(*x);
            x_max = x_max.max(*x);
            y_min = y_min.min(*y);
            y_max = y_max.max(*y);
        }
        if finite.is_empty() {
            (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
        }
        if x_max - x_min < 1e-12 {
            let pad = x_min.abs().max(1.0) * 0.5;
            x_min -= pad;
            x_max += pad;
        }
        if y_max - y_min < 1e-12 {
            let pad = y_min.abs().max(1.0) * 0.5;
            y_min -= pad;
            y_max += pad;
        }
        let (x_ticks, x_step) = linear_ticks(x_min, x_max, 7);
        let (y_ticks, y_step): (Vec<f64>, f64) = match self.y_scale {
            YScale::Linear => linear_ticks(y_min, y_max, 6),
            YScale::Log10 => {
                let first = y_min.ceil() as i64;
                let last = y_max.floor() as i64;
                if first > last {
                    linear_ticks(y_min, y_max, 6)
                } else {
                    let count = (last - first + 1) as usize;
                    let stride = count.div_ceil(8).max(1) as i64;
                    ((first..=last).step_by(stride as usize).map(|k| k as f64).collect(), 1.0)
                }
            }
        };
        // Breathing room around the data so markers stay inside the frame.
        let x_pad = (x_max - x_min) * 0.04;
        let y_pad = (y_max - y_min) * 0.06;
        let (x_lo, x_hi) = (x_min - x_pad, x_max + x_pad);
        let (y_lo, y_hi) = (y_min - y_pad, y_max + y_pad);
        let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
        let py = |y: f64| BOTTOM - (y - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP);

        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"Helvetica, Arial, sans-serif\">"
        );
        let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"27\" font-size=\"16\" text-anchor=\"middle\" fill=\"#222222\">{}</text>",
            (LEFT + RIGHT) / 2.0,
            esc(&self.title)
        );

        // Grid and tick labels.
        for &t in &y_ticks {
            let y = py(t);
            let _ = writeln!(
                s,
                "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{RIGHT:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>"
            );
            let label = match self.y_scale {
                YScale::Linear => tick_label(t, y_step),
                YScale::Log10 => format!("1e{}", tick_label(t, y_step)),
            };
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\" fill=\"#444444\">{}</text>",
                LEFT - 7.0,
                y + 3.5,
                esc(&label)
            );
        }
        for &t in &x_ticks {
            let x = px(t);
            let _ = writeln!(
                s,
                "<line x1=\"{x:.2}\" y1=\"{TOP:.2}\" x2=\"{x:.2}\" y2=\"{BOTTOM:.2}\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>"
            );
            let _ = writeln!(
                s,
                "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#444444\">{}</text>",
                BOTTOM + 17.0,
                esc(&tick_label(t, x_step))
            );
        }

        // Axes on top of the grid.
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT:.2}\" y1=\"{BOTTOM:.2}\" x2=\"{RIGHT:.2}\" y2=\"{BOTTOM:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT:.2}\" y1=\"{TOP:.2}\" x2=\"{LEFT:.2}\" y2=\"{BOTTOM:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222222\">{}</text>",
            (LEFT + RIGHT) / 2.0,
            BOTTOM + 40.0,
            esc(&self.x_label)
        );
        let mid_y = (TOP + BOTTOM) / 2.0;
        let _ = writeln!(
            s,
            "<text x=\"19\" y=\"{mid_y:.2}\" font-size=\"13\" text-anchor=\"middle\" \
             transform=\"rotate(-90 19 {mid_y:.2})\" fill=\"#222222\">{}</text>",
            esc(&self.y_label)
        );

        // Data: one polyline per series, plus point markers.
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut coords = String::new();
            for &(x, y) in &series.points {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                if !coords.is_empty() {
                    coords.push(' ');
                }
                let _ = write!(coords, "{:.2},{:.2}", px(x), py(y));
            }
            let _ = writeln!(
                s,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" \
                 stroke-linejoin=\"round\" points=\"{coords}\"/>"
            );
            for &(x, y) in &series.points {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                let _ = writeln!(
                    s,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                    px(x),
                    py(y)
                );
            }
        }

        // Legend, top-right inside the plot area.
        if !self.series.is_empty() {
            let box_w = 190.0;
            let box_h = 10.0 + 18.0 * self.series.len() as f64;
            let bx = RIGHT - box_w - 6.0;
            let by = TOP + 6.0;
            let _ = writeln!(
                s,
                "<rect x=\"{bx:.2}\" y=\"{by:.2}\" width=\"{box_w:.2}\" height=\"{box_h:.2}\" \
                 fill=\"#ffffff\" fill-opacity=\"0.85\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>"
            );
            for (i, series) in self.series.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                let y = by + 14.0 + 18.0 * i as f64;
                let _ = writeln!(
                    s,
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"2.5\"/>",
                    bx + 8.0,
                    y,
                    bx + 30.0,
                    y
                );
                let _ = writeln!(
                    s,
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#222222\">{}</text>",
                    bx + 36.0,
                    y + 4.0,
                    esc(&series.label)
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}
