//! File outputs for sweeps and tolerance studies: CSV tables plus a
//! `meta.json` that pins down exactly what was run.
//!
//! Every writer is deterministic — fixed column order, shortest-round-trip
//! float formatting, no timestamps — so identical inputs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Error;
use crate::Result;

use super::sweep::{ExperimentPlan, SerRecord, SweepOutput};
use super::tolerance::{ToleranceStudyConfig, ToleranceStudyOutput};

pub(crate) const SER_HEADER: &str =
    "l,snr_db,detector,frames,symbols_per_frame,symbol_errors,ser,failed_frames,config_fingerprint,seed";
pub(crate) const ACF_HEADER: &str = "weighting,metric,epsilon,component,lag,acf";
pub(crate) const EDF_HEADER: &str = "weighting,metric,epsilon,dataset,max_edf_distance,stuck";

/// Render sweep records as the `ser.csv` table.
pub fn ser_csv_string(records: &[SerRecord]) -> String {
    let mut out = String::new();
    out.push_str(SER_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.l,
            r.snr_db,
            r.detector,
            r.frames,
            r.symbols_per_frame,
            r.symbol_errors,
            r.ser,
            r.failed_frames,
            r.config_fingerprint,
            r.seed
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Write `ser.csv` for the given records.
pub fn write_ser_csv(records: &[SerRecord], path: &Path) -> Result<()> {
    fs::write(path, ser_csv_string(records))?;
    Ok(())
}

/// Parse a `ser.csv` file back into records, re-checking on every row that
/// the stored rate equals `symbol_errors / (frames * symbols_per_frame)`.
pub fn read_ser_csv(path: &Path) -> Result<Vec<SerRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))?;
    if header != SER_HEADER {
        return Err(Error::Config(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2; // 1-based, after the header
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Config(format!(
                "{}:{row}: expected 10 fields, found {}",
                path.display(),
                fields.len()
            )));
        }
        let parse_err = |field: &str, what: &str| {
            Error::Config(format!("{}:{row}: bad {what} {field:?}", path.display()))
        };
        let record = SerRecord {
            l: fields[0].parse().map_err(|_| parse_err(fields[0], "relay count"))?,
            snr_db: fields[1].parse().map_err(|_| parse_err(fields[1], "SNR"))?,
            detector: serde_json::from_value(serde_json::Value::String(fields[2].into()))
                .map_err(|_| parse_err(fields[2], "detector"))?,
            frames: fields[3].parse().map_err(|_| parse_err(fields[3], "frame count"))?,
            symbols_per_frame: fields[4]
                .parse()
                .map_err(|_| parse_err(fields[4], "symbols per frame"))?,
            symbol_errors: fields[5].parse().map_err(|_| parse_err(fields[5], "error count"))?,
            ser: fields[6].parse().map_err(|_| parse_err(fields[6], "error rate"))?,
            failed_frames: fields[7].parse().map_err(|_| parse_err(fields[7], "failure count"))?,
            config_fingerprint: fields[8].to_string(),
            seed: fields[9].parse().map_err(|_| parse_err(fields[9], "seed"))?,
        };
        let expected =
            record.symbol_errors as f64 / (record.frames * record.symbols_per_frame) as f64;
        if (record.ser - expected).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "{}:{row}: stored rate {} does not equal {}/{}",
                path.display(),
                record.ser,
                record.symbol_errors,
                record.frames * record.symbols_per_frame
            )));
        }
        records.push(record);
    }
    Ok(records)
}

/// Render the study's autocorrelation tables as the `acf.csv` table:
/// baseline rows first, then each (variant, tolerance) cell, one row per
/// tracked component and lag. Values are dataset means.
pub fn acf_csv_string(output: &ToleranceStudyOutput) -> String {
    let mut out = String::new();
    out.push_str(ACF_HEADER);
    out.push('\n');
    let mut push_curves =
        |weighting: &str, metric: &str, epsilon: f64, curves: &[super::tolerance::AcfCurve]| {
            for curve in curves {
                for (lag, value) in curve.values.iter().enumerate() {
                    writeln!(
                        out,
                        "{weighting},{metric},{epsilon},{},{lag},{value}",
                        curve.component
                    )
                    .expect("writing to a String cannot fail");
                }
            }
        };
    push_curves("soft", "mahalanobis", output.baseline.epsilon, &output.baseline.acf);
    for cell in &output.cells {
        push_curves(
            &cell.weighting.to_string(),
            &cell.metric.to_string(),
            cell.epsilon,
            &cell.acf,
        );
    }
    out
}

/// Write `acf.csv` for the study.
pub fn write_acf_csv(output: &ToleranceStudyOutput, path: &Path) -> Result<()> {
    fs::write(path, acf_csv_string(output))?;
    Ok(())
}

/// Render the study's EDF discrepancies as the `edf.csv` table: one row per
/// (variant, tolerance, dataset) with stuck flags as 0/1, then a `mean` row
/// per cell whose stuck column carries the stuck fraction.
pub fn edf_csv_string(output: &ToleranceStudyOutput) -> String {
    let mut out = String::new();
    out.push_str(EDF_HEADER);
    out.push('\n');
    for cell in &output.cells {
        let weighting = cell.weighting.to_string();
        let metric = cell.metric.to_string();
        for (dataset, (edf, stuck)) in cell.max_edf.iter().zip(&cell.stuck).enumerate() {
            writeln!(
                out,
                "{weighting},{metric},{},{dataset},{edf},{}",
                cell.epsilon,
                u8::from(*stuck)
            )
            .expect("writing to a String cannot fail");
        }
        let stuck_fraction =
            cell.stuck.iter().filter(|&&s| s).count() as f64 / cell.stuck.len() as f64;
        writeln!(
            out,
            "{weighting},{metric},{},mean,{},{stuck_fraction}",
            cell.epsilon, cell.mean_max_edf
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Write `edf.csv` for the study.
pub fn write_edf_csv(output: &ToleranceStudyOutput, path: &Path) -> Result<()> {
    fs::write(path, edf_csv_string(output))?;
    Ok(())
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    schema: &'static str,
    plan_fingerprint: &'a str,
    plan: &'a ExperimentPlan,
    cells: &'a [super::sweep::CellReport],
    notes: [&'static str; 4],
}

#[derive(Serialize)]
struct ToleranceMeta<'a> {
    schema: &'static str,
    config_fingerprint: &'a str,
    config: &'a ToleranceStudyConfig,
    baseline_tuning: &'a crate::samplers::TuneOutcome,
    baseline_mean_acceptance: f64,
    scales: &'a [super::tolerance::EpsilonTuning],
    notes: [&'static str; 3],
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Write a sweep's artifacts into `dir` (created if needed): `ser.csv` and
/// `meta.json`. The metadata embeds the full plan, the per-cell noise
/// mapping and tuning results, and the design notes a reader needs to
/// interpret the numbers.
pub fn write_sweep_outputs(output: &SweepOutput, plan: &ExperimentPlan, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_ser_csv(&output.records, &dir.join("ser.csv"))?;
    let meta = SweepMeta {
        schema: "relaysim-sweep-meta-v1",
        plan_fingerprint: &output.plan_fingerprint,
        plan,
        cells: &output.cells,
        notes: [
            "error rate = symbol_errors / (frames * symbols_per_frame)",
            "channels are redrawn from the CSI prior for every frame; the estimates stay fixed",
            "proposal scales are tuned once per cell and reused for all of its frames",
            "wall-clock time is excluded from all outputs so reruns are byte-identical",
        ],
    };
    write_json(&meta, &dir.join("meta.json"))
}

/// Write a tolerance study's artifacts into `dir` (created if needed):
/// `acf.csv`, `edf.csv`, and `meta.json`.
pub fn write_tolerance_outputs(
    output: &ToleranceStudyOutput,
    config: &ToleranceStudyConfig,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_acf_csv(output, &dir.join("acf.csv"))?;
    write_edf_csv(output, &dir.join("edf.csv"))?;
    let meta = ToleranceMeta {
        schema: "relaysim-tolerance-meta-v1",
        config_fingerprint: &output.config_fingerprint,
        config,
        baseline_tuning: &output.baseline.tuning,
        baseline_mean_acceptance: output.baseline.mean_acceptance,
        scales: &output.scales,
        notes: [
            "edf.csv: per-dataset rows use stuck 0/1; each mean row's stuck column is the stuck fraction",
            "acf.csv values are means over datasets; stuck chains contribute flat unit curves",
            "proposal scales are tuned per tolerance on the soft/mahalanobis variant and shared",
        ],
    };
    write_json(&meta, &dir.join("meta.json"))
}
