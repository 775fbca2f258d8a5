//! `plot` subcommand internals: parse the CSV tables and assemble charts.
//!
//! Plotting is a pure transformation of the tables — no statistic is ever
//! recomputed here — so figures always agree with the CSVs they came from.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::detectors::DetectionMethod;
use crate::error::Error;
use crate::harness::{ACF_HEADER, EDF_HEADER, SerRecord};
use crate::Result;

use super::svg::{Chart, Series, YScale};

/// One figure to render: the target file name and its chart.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Figure {
    pub name: String,
    pub chart: Chart,
}

/// One row of an autocorrelation table.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AcfRow {
    pub weighting: String,
    pub metric: String,
    pub epsilon: f64,
    pub component: String,
    pub lag: usize,
    pub acf: f64,
}

/// One row of an EDF-discrepancy table. `dataset` is `None` for the
/// per-cell mean rows, whose `stuck` column carries the stuck fraction.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EdfRow {
    pub weighting: String,
    pub metric: String,
    pub epsilon: f64,
    pub dataset: Option<usize>,
    pub value: f64,
    pub stuck: f64,
}

fn field_error(path: &Path, row: usize, what: &str, field: &str) -> Error {
    Error::Config(format!("{}:{row}: bad {what} {field:?}", path.display()))
}

fn split_row<'l>(path: &Path, row: usize, line: &'l str, fields: usize) -> Result<Vec<&'l str>> {
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != fields {
        return Err(Error::Config(format!(
            "{}:{row}: expected {fields} fields, found {}",
            path.display(),
            parts.len()
        )));
    }
    Ok(parts)
}

fn check_header(path: &Path, text: &str, expected: &str) -> Result<()> {
    match text.lines().next() {
        None => Err(Error::Config(format!("{}: empty file", path.display()))),
        Some(h) if h != expected => {
            Err(Error::Config(format!("{}: unexpected header {h:?}", path.display())))
        }
        Some(_) => Ok(()),
    }
}

/// Parse an autocorrelation table (`acf.csv`).
pub(crate) fn read_acf_csv(path: &Path) -> Result<Vec<AcfRow>> {
    let text = fs::read_to_string(path)?;
    check_header(path, &text, ACF_HEADER)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().skip(1).enumerate() {
        let row = i + 2;
        let f = split_row(path, row, line, 6)?;
        let epsilon: f64 =
            f[2].parse().map_err(|_| field_error(path, row, "tolerance", f[2]))?;
        let lag: usize = f[4].parse().map_err(|_| field_error(path, row, "lag", f[4]))?;
        let acf: f64 = f[5].parse().map_err(|_| field_error(path, row, "autocorrelation", f[5]))?;
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(field_error(path, row, "tolerance", f[2]));
        }
        if !acf.is_finite() {
            return Err(field_error(path, row, "autocorrelation", f[5]));
        }
        rows.push(AcfRow {
            weighting: f[0].to_string(),
            metric: f[1].to_string(),
            epsilon,
            component: f[3].to_string(),
            lag,
            acf,
        });
    }
    Ok(rows)
}

/// Parse an EDF-discrepancy table (`edf.csv`).
pub(crate) fn read_edf_csv(path: &Path) -> Result<Vec<EdfRow>> {
    let text = fs::read_to_string(path)?;
    check_header(path, &text, EDF_HEADER)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().skip(1).enumerate() {
        let row = i + 2;
        let f = split_row(path, row, line, 6)?;
        let epsilon: f64 =
            f[2].parse().map_err(|_| field_error(path, row, "tolerance", f[2]))?;
        let dataset = if f[3] == "mean" {
            None
        } else {
            Some(f[3].parse::<usize>().map_err(|_| field_error(path, row, "dataset", f[3]))?)
        };
        let value: f64 = f[4].parse().map_err(|_| field_error(path, row, "distance", f[4]))?;
        let stuck: f64 = f[5].parse().map_err(|_| field_error(path, row, "stuck flag", f[5]))?;
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(field_error(path, row, "tolerance", f[2]));
        }
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(field_error(path, row, "distance", f[4]));
        }
        let stuck_ok = match dataset {
            Some(_) => stuck == 0.0 || stuck == 1.0,
            None => (0.0..=1.0).contains(&stuck),
        };
        if !stuck_ok {
            return Err(field_error(path, row, "stuck flag", f[5]));
        }
        rows.push(EdfRow {
            weighting: f[0].to_string(),
            metric: f[1].to_string(),
            epsilon,
            dataset,
            value,
            stuck,
        });
    }
    Ok(rows)
}

/// Make a string safe for use in a file name.
fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// Error-rate charts: one figure per relay count, one series per detector,
/// error rate on a log scale against SNR.
pub(crate) fn ser_figures(records: &[SerRecord]) -> Result<Vec<Figure>> {
    if records.is_empty() {
        return Err(Error::Config("SER table has no data rows".into()));
    }
    let mut ls: Vec<usize> = records.iter().map(|r| r.l).collect();
    ls.sort_unstable();
    ls.dedup();

    let mut figures = Vec::new();
    for l in ls {
        let rows: Vec<&SerRecord> = records.iter().filter(|r| r.l == l).collect();
        // Zero error counts cannot sit on a log axis; clamp them to half the
        // smallest positive rate in this figure so the line stays visible.
        let min_positive =
            rows.iter().filter(|r| r.ser > 0.0).map(|r| r.ser).fold(f64::INFINITY, f64::min);
        let floor = if min_positive.is_finite() { min_positive / 2.0 } else { 1e-6 };

        let mut order: Vec<DetectionMethod> = Vec::new();
        for r in &rows {
            if !order.contains(&r.detector) {
                order.push(r.detector);
            }
        }
        let series = order
            .iter()
            .map(|&detector| {
                let mut points: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.detector == detector)
                    .map(|r| (r.snr_db, r.ser.max(floor).log10()))
                    .collect();
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series { label: detector.to_string(), points }
            })
            .collect();
        figures.push(Figure {
            name: format!("ser_l{l}.svg"),
            chart: Chart {
                title: format!("Symbol error rate vs SNR, L = {l}"),
                x_label: "SNR (dB)".into(),
                y_label: "symbol error rate".into(),
                y_scale: YScale::Log10,
                series,
            },
        });
    }
    Ok(figures)
}

/// Autocorrelation charts: one figure per (component, weighting, metric),
/// one series per tolerance.
pub(crate) fn acf_figures(rows: &[AcfRow]) -> Result<Vec<Figure>> {
    if rows.is_empty() {
        return Err(Error::Config("autocorrelation table has no data rows".into()));
    }
    let mut groups: BTreeMap<(String, String, String), Vec<&AcfRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.component.clone(), row.weighting.clone(), row.metric.clone()))
            .or_default()
            .push(row);
    }
    let mut figures = Vec::new();
    for ((component, weighting, metric), group) in groups {
        let mut epsilons: Vec<f64> = group.iter().map(|r| r.epsilon).collect();
        epsilons.sort_by(f64::total_cmp);
        epsilons.dedup();
        let series = epsilons
            .iter()
            .map(|&eps| {
                let mut points: Vec<(f64, f64)> = group
                    .iter()
                    .filter(|r| r.epsilon == eps)
                    .map(|r| (r.lag as f64, r.acf))
                    .collect();
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series { label: format!("eps {eps}"), points }
            })
            .collect();
        figures.push(Figure {
            name: format!(
                "acf_{}_{}_{}.svg",
                sanitize(&component),
                sanitize(&weighting),
                sanitize(&metric)
            ),
            chart: Chart {
                title: format!("Autocorrelation of {component} ({weighting}, {metric})"),
                x_label: "lag".into(),
                y_label: "autocorrelation".into(),
                y_scale: YScale::Linear,
                series,
            },
        });
    }
    Ok(figures)
}

/// EDF-discrepancy chart: mean maximal distance against tolerance, one
/// series per (weighting, metric) variant.
pub(crate) fn edf_figure(rows: &[EdfRow]) -> Result<Figure> {
    let means: Vec<&EdfRow> = rows.iter().filter(|r| r.dataset.is_none()).collect();
    if means.is_empty() {
        return Err(Error::Config("EDF table has no mean rows".into()));
    }
    let mut groups: BTreeMap<(String, String), Vec<&EdfRow>> = BTreeMap::new();
    for row in means {
        groups.entry((row.weighting.clone(), row.metric.clone())).or_default().push(row);
    }
    let series = groups
        .into_iter()
        .map(|((weighting, metric), group)| {
            let mut points: Vec<(f64, f64)> =
                group.iter().map(|r| (r.epsilon, r.value)).collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label: format!("{weighting} {metric}"), points }
        })
        .collect();
    Ok(Figure {
        name: "edf_error.svg".into(),
        chart: Chart {
            title: "Mean maximal EDF discrepancy vs tolerance".into(),
            x_label: "tolerance".into(),
            y_label: "mean max EDF distance".into(),
            y_scale: YScale::Linear,
            series,
        },
    })
}
