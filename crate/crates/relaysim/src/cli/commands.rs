//! The six subcommand bodies and their configuration documents.
//!
//! Every command follows the same shape: validate, compute, write artifacts
//! under an [`OutputGuard`], re-read and validate what was written, and only
//! then commit the guard and report success.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::abc::AbcSpec;
use crate::detectors::DetectionMethod;
use crate::error::Error;
use crate::fingerprint::short_fingerprint;
use crate::harness::{
    ExperimentPlan, PreparedSuite, ToleranceStudyConfig, draw_frame, prepare_suite, read_ser_csv,
    run_frame_detailed, run_ser_sweep, run_tolerance_study, write_sweep_outputs,
    write_tolerance_outputs,
};
use crate::model::{Codeword, Constellation, SystemConfig};
use crate::rng::RngStream;
use crate::samplers::{SamplerKind, SamplerSettings, TuneOptions, TuneOutcome};
use crate::Result;

use super::plot::{self, Figure};
use super::{note, OutputGuard};

/// `simulate` configuration: dump frames drawn from a system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// System to draw frames from.
    pub system: SystemConfig,
    /// Number of frames to dump.
    pub frames: usize,
    /// Root seed. Frame `f` is drawn on the same stream `detect` uses, so
    /// the two commands see identical frames given identical seeds.
    pub master_seed: u64,
}

/// `detect` configuration: run detectors on freshly simulated frames.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectConfig {
    /// System frames are drawn from and detected under.
    pub system: SystemConfig,
    /// Detectors to run on every frame.
    pub detectors: Vec<DetectionMethod>,
    /// Number of frames.
    pub frames: usize,
    /// Likelihood-free sampler configuration (used by `mcmc-abc`).
    #[serde(default)]
    pub abc: AbcSpec,
    /// Chain length and scan configuration for the MCMC detectors.
    #[serde(default = "SamplerSettings::standard")]
    pub settings: SamplerSettings,
    /// Proposal-scale tuning options, applied once before the first frame.
    #[serde(default)]
    pub tune: TuneOptions,
    /// Root seed for tuning and every frame.
    pub master_seed: u64,
}

/// `tune` configuration: search proposal scales for the chosen chains.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    /// System the pilot chains run against.
    pub system: SystemConfig,
    /// Chains to tune scales for.
    pub samplers: Vec<SamplerKind>,
    /// Likelihood-free sampler configuration (used by the `abc` chain).
    #[serde(default)]
    pub abc: AbcSpec,
    /// Chain length and scan configuration the tuned scales are meant for.
    #[serde(default = "SamplerSettings::standard")]
    pub settings: SamplerSettings,
    /// Tuning control parameters.
    #[serde(default)]
    pub tune: TuneOptions,
    /// Root seed; `detect` and `sweep` runs with the same system and seed
    /// tune to exactly these scales.
    pub master_seed: u64,
}

/// `plot` configuration: which tables to chart. Relative paths resolve
/// against the directory containing the configuration file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    /// Error-rate table written by `sweep`; one figure per relay count.
    #[serde(default)]
    pub ser_csv: Option<PathBuf>,
    /// Autocorrelation table written by `tolerance-study`; one figure per
    /// (component, weighting, metric), one series per tolerance.
    #[serde(default)]
    pub acf_csv: Option<PathBuf>,
    /// EDF-discrepancy table written by `tolerance-study`; one figure,
    /// one series per (weighting, metric).
    #[serde(default)]
    pub edf_csv: Option<PathBuf>,
}

pub(crate) const FRAMES_HEADER: &str =
    "frame,relay,slot,symbol_index,symbol,h_re,h_im,g_re,g_im,y_re,y_im";
pub(crate) const DETECTIONS_HEADER: &str =
    "frame,detector,decided,truth,symbol_errors,score,status";
const TUNING_SCHEMA: &str = "relaysim-tuning-v1";

fn plural(n: usize) -> &'static str {
    if n == 1 { "" } else { "s" }
}

/// Symbol indices of a codeword joined with `-`, e.g. `0-3`.
fn codeword_indices(cw: &Codeword) -> String {
    cw.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join("-")
}

/// Amplitudes of a codeword, e.g. `[-3, 1]`.
fn codeword_symbols(cw: &Codeword, constellation: &Constellation) -> String {
    let parts: Vec<String> =
        cw.symbols(constellation).iter().map(|v| format!("{v}")).collect();
    format!("[{}]", parts.join(", "))
}

fn note_tuning(quiet: bool, label: &str, outcome: &TuneOutcome) {
    note!(
        quiet,
        "{label}: acceptance {:.3} after {} pilot{} ({}); scales g {:.6} h {:.6} w {:.6}",
        outcome.acceptance_rate,
        outcome.pilots_run,
        plural(outcome.pilots_run),
        if outcome.converged { "in band" } else { "band not reached" },
        outcome.scales.sigma_g_sq,
        outcome.scales.sigma_h_sq,
        outcome.scales.sigma_w_sq,
    );
}

/// Dump `frames.csv`: one row per (frame, relay, slot) carrying the sent
/// symbol, both channel coefficients, and the received value.
pub(crate) fn run_simulate(cfg: &SimulateConfig, out: &Path, quiet: bool) -> Result<()> {
    cfg.system.validate()?;
    if cfg.frames == 0 {
        return Err(Error::invalid("frames must be at least 1"));
    }
    let master = RngStream::new(cfg.master_seed);
    let mut text = String::from(FRAMES_HEADER);
    text.push('\n');
    for f in 0..cfg.frames {
        let frame = draw_frame(&cfg.system, ExperimentPlan::frame_stream(master, f))?;
        let symbols = frame.truth.symbols(&cfg.system.constellation);
        for (li, row) in frame.draw.y.rows.iter().enumerate() {
            for (slot, y) in row.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "{f},{li},{slot},{},{},{},{},{},{},{},{}",
                    frame.truth.indices()[slot],
                    symbols[slot],
                    frame.channels.h[li].re,
                    frame.channels.h[li].im,
                    frame.channels.g[li].re,
                    frame.channels.g[li].im,
                    y.re,
                    y.im,
                );
            }
        }
    }

    fs::create_dir_all(out)?;
    let mut guard = OutputGuard::new();
    let path = guard.track(out.join("frames.csv"));
    fs::write(&path, &text)?;
    validate_frames_csv(&path, &cfg.system, cfg.frames)?;
    guard.commit();
    note!(quiet, "wrote {} ({} frame{})", path.display(), cfg.frames, plural(cfg.frames));
    Ok(())
}

fn validate_frames_csv(path: &Path, system: &SystemConfig, frames: usize) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == FRAMES_HEADER => {}
        _ => return Err(Error::Config(format!("{}: bad frame dump header", path.display()))),
    }
    let l = system.relays();
    let k = system.symbols_per_frame();
    let m = system.constellation.order();
    let mut count = 0usize;
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Config(format!(
                "{}:{row}: expected 11 fields, found {}",
                path.display(),
                fields.len()
            )));
        }
        let bad = |what: &str, f: &str| {
            Error::Config(format!("{}:{row}: bad {what} {f:?}", path.display()))
        };
        let frame: usize = fields[0].parse().map_err(|_| bad("frame", fields[0]))?;
        let relay: usize = fields[1].parse().map_err(|_| bad("relay", fields[1]))?;
        let slot: usize = fields[2].parse().map_err(|_| bad("slot", fields[2]))?;
        let ix: usize = fields[3].parse().map_err(|_| bad("symbol index", fields[3]))?;
        if frame >= frames || relay >= l || slot >= k || ix >= m {
            return Err(Error::Config(format!(
                "{}:{row}: indices out of range for the configured system",
                path.display()
            )));
        }
        for (name, field) in
            ["symbol", "h_re", "h_im", "g_re", "g_im", "y_re", "y_im"].iter().zip(&fields[4..])
        {
            let v: f64 = field.parse().map_err(|_| bad(name, field))?;
            if !v.is_finite() {
                return Err(bad(name, field));
            }
        }
        count += 1;
    }
    let expected = frames * l * k;
    if count != expected {
        return Err(Error::Config(format!(
            "{}: {count} data rows, expected {expected}",
            path.display()
        )));
    }
    Ok(())
}

/// Run every configured detector on simulated frames and dump
/// `detections.csv`: one row per (frame, detector) with the decision, the
/// truth, and the symbol-error count.
pub(crate) fn run_detect(cfg: &DetectConfig, out: &Path, quiet: bool) -> Result<()> {
    cfg.system.validate()?;
    if cfg.frames == 0 {
        return Err(Error::invalid("frames must be at least 1"));
    }
    let master = RngStream::new(cfg.master_seed);
    let PreparedSuite { suite, abc_tuning, av_tuning } =
        prepare_suite(&cfg.system, &cfg.detectors, &cfg.abc, &cfg.settings, &cfg.tune, master)?;
    if let Some(outcome) = &abc_tuning {
        note_tuning(quiet, "tuned mcmc-abc", outcome);
    }
    if let Some(outcome) = &av_tuning {
        note_tuning(quiet, "tuned mcmc-av", outcome);
    }

    let k = cfg.system.symbols_per_frame();
    let mut text = String::from(DETECTIONS_HEADER);
    text.push('\n');
    let mut errors = vec![0usize; cfg.detectors.len()];
    let mut failures = vec![0usize; cfg.detectors.len()];
    for f in 0..cfg.frames {
        let frame =
            run_frame_detailed(&cfg.system, &suite, ExperimentPlan::frame_stream(master, f))?;
        let truth_ix = codeword_indices(&frame.truth);
        let mut shown: Vec<String> = Vec::new();
        for (i, (method, detection)) in
            cfg.detectors.iter().zip(&frame.detections).enumerate()
        {
            match detection {
                Ok(d) => {
                    let e = frame.truth.symbol_errors(&d.s_hat);
                    let _ = writeln!(
                        text,
                        "{f},{method},{},{truth_ix},{e},{},ok",
                        codeword_indices(&d.s_hat),
                        d.score
                    );
                    errors[i] += e;
                    shown.push(format!(
                        "{method} {} ({e} error{})",
                        codeword_symbols(&d.s_hat, &cfg.system.constellation),
                        plural(e)
                    ));
                }
                Err(err) => {
                    let _ = writeln!(text, "{f},{method},,{truth_ix},,,failed");
                    failures[i] += 1;
                    eprintln!("frame {f}: {method} failed: {err}");
                    shown.push(format!("{method} failed"));
                }
            }
        }
        note!(
            quiet,
            "frame {f} sent {}: {}",
            codeword_symbols(&frame.truth, &cfg.system.constellation),
            shown.join(", ")
        );
    }

    fs::create_dir_all(out)?;
    let mut guard = OutputGuard::new();
    let path = guard.track(out.join("detections.csv"));
    fs::write(&path, &text)?;
    validate_detections_csv(&path, cfg)?;
    guard.commit();
    for (i, method) in cfg.detectors.iter().enumerate() {
        note!(
            quiet,
            "{method}: {} symbol error{} / {} symbols (rate {}), {} failed frame{}",
            errors[i],
            plural(errors[i]),
            cfg.frames * k,
            errors[i] as f64 / (cfg.frames * k) as f64,
            failures[i],
            plural(failures[i])
        );
    }
    note!(quiet, "wrote {}", path.display());
    Ok(())
}

fn parse_codeword_field(path: &Path, row: usize, text: &str, k: usize, m: usize) -> Result<Vec<usize>> {
    let bad =
        || Error::Config(format!("{}:{row}: bad codeword {text:?}", path.display()));
    let indices: Vec<usize> =
        text.split('-').map(|part| part.parse::<usize>().map_err(|_| bad())).collect::<Result<_>>()?;
    if indices.len() != k || indices.iter().any(|&i| i >= m) {
        return Err(bad());
    }
    Ok(indices)
}

fn validate_detections_csv(path: &Path, cfg: &DetectConfig) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DETECTIONS_HEADER => {}
        _ => return Err(Error::Config(format!("{}: bad detections header", path.display()))),
    }
    let k = cfg.system.symbols_per_frame();
    let m = cfg.system.constellation.order();
    let mut count = 0usize;
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Config(format!(
                "{}:{row}: expected 7 fields, found {}",
                path.display(),
                fields.len()
            )));
        }
        let bad = |what: &str, f: &str| {
            Error::Config(format!("{}:{row}: bad {what} {f:?}", path.display()))
        };
        let frame: usize = fields[0].parse().map_err(|_| bad("frame", fields[0]))?;
        if frame >= cfg.frames {
            return Err(bad("frame", fields[0]));
        }
        let _: DetectionMethod =
            serde_json::from_value(serde_json::Value::String(fields[1].into()))
                .map_err(|_| bad("detector", fields[1]))?;
        let truth = parse_codeword_field(path, row, fields[3], k, m)?;
        match fields[6] {
            "ok" => {
                let decided = parse_codeword_field(path, row, fields[2], k, m)?;
                let stored: usize =
                    fields[4].parse().map_err(|_| bad("error count", fields[4]))?;
                let recomputed =
                    decided.iter().zip(&truth).filter(|(a, b)| a != b).count();
                if stored != recomputed {
                    return Err(Error::Config(format!(
                        "{}:{row}: stored error count {stored} does not match the decision",
                        path.display()
                    )));
                }
                let score: f64 = fields[5].parse().map_err(|_| bad("score", fields[5]))?;
                if score.is_nan() {
                    return Err(bad("score", fields[5]));
                }
            }
            "failed" => {
                if !(fields[2].is_empty() && fields[4].is_empty() && fields[5].is_empty()) {
                    return Err(Error::Config(format!(
                        "{}:{row}: failed rows must leave decision fields empty",
                        path.display()
                    )));
                }
            }
            other => return Err(bad("status", other)),
        }
        count += 1;
    }
    let expected = cfg.frames * cfg.detectors.len();
    if count != expected {
        return Err(Error::Config(format!(
            "{}: {count} data rows, expected {expected}",
            path.display()
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TuningReport<'a> {
    schema: &'static str,
    config_fingerprint: &'a str,
    results: &'a [TuningEntry],
}

#[derive(Debug, Serialize)]
struct TuningEntry {
    sampler: SamplerKind,
    outcome: TuneOutcome,
}

fn sampler_name(kind: SamplerKind) -> &'static str {
    match kind {
        SamplerKind::Abc => "abc",
        SamplerKind::AuxiliaryVariable => "auxiliary_variable",
    }
}

/// Tune proposal scales for the requested chains and write `tuning.json`.
pub(crate) fn run_tune(cfg: &TuneConfig, out: &Path, quiet: bool) -> Result<()> {
    cfg.system.validate()?;
    if cfg.samplers.is_empty() {
        return Err(Error::invalid("tune needs at least one sampler"));
    }
    for (i, s) in cfg.samplers.iter().enumerate() {
        if cfg.samplers[..i].contains(s) {
            return Err(Error::invalid(format!(
                "sampler {} is listed twice",
                sampler_name(*s)
            )));
        }
    }
    let detectors: Vec<DetectionMethod> = cfg
        .samplers
        .iter()
        .map(|s| match s {
            SamplerKind::Abc => DetectionMethod::McmcAbc,
            SamplerKind::AuxiliaryVariable => DetectionMethod::McmcAv,
        })
        .collect();
    let prepared = prepare_suite(
        &cfg.system,
        &detectors,
        &cfg.abc,
        &cfg.settings,
        &cfg.tune,
        RngStream::new(cfg.master_seed),
    )?;
    let results: Vec<TuningEntry> = cfg
        .samplers
        .iter()
        .map(|&sampler| TuningEntry {
            sampler,
            outcome: match sampler {
                SamplerKind::Abc => prepared.abc_tuning,
                SamplerKind::AuxiliaryVariable => prepared.av_tuning,
            }
            .expect("prepared for every requested sampler"),
        })
        .collect();
    for entry in &results {
        note_tuning(quiet, sampler_name(entry.sampler), &entry.outcome);
    }

    let fingerprint = short_fingerprint(&cfg.system)?;
    let report =
        TuningReport { schema: TUNING_SCHEMA, config_fingerprint: &fingerprint, results: &results };
    fs::create_dir_all(out)?;
    let mut guard = OutputGuard::new();
    let path = guard.track(out.join("tuning.json"));
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(&path, &json)?;
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path)?)?;
    if parsed.get("schema").and_then(|v| v.as_str()) != Some(TUNING_SCHEMA) {
        return Err(Error::Config(format!(
            "{}: schema field did not round-trip",
            path.display()
        )));
    }
    guard.commit();
    note!(quiet, "wrote {}", path.display());
    Ok(())
}

/// Run a full error-rate sweep and write `ser.csv` plus `meta.json`.
pub(crate) fn run_sweep(plan: &ExperimentPlan, out: &Path, quiet: bool) -> Result<()> {
    plan.validate()?;
    let cells = plan.cells();
    note!(
        quiet,
        "sweep: {} cell{} x {} frame{}, detectors [{}]",
        cells.len(),
        plural(cells.len()),
        plan.frames_per_cell,
        plural(plan.frames_per_cell),
        plan.detectors.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
    );
    let output = run_ser_sweep(plan)?;

    fs::create_dir_all(out)?;
    let mut guard = OutputGuard::new();
    let ser_path = guard.track(out.join("ser.csv"));
    let meta_path = guard.track(out.join("meta.json"));
    write_sweep_outputs(&output, plan, out)?;
    let reread = read_ser_csv(&ser_path)?;
    if reread != output.records {
        return Err(Error::Config(format!(
            "{}: records did not round-trip",
            ser_path.display()
        )));
    }
    let _: serde_json::Value = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
    guard.commit();

    for r in &output.records {
        note!(
            quiet,
            "L={} snr={} dB {}: ser {} ({} failed frame{})",
            r.l,
            r.snr_db,
            r.detector,
            r.ser,
            r.failed_frames,
            plural(r.failed_frames)
        );
    }
    note!(quiet, "wrote {}", ser_path.display());
    note!(quiet, "wrote {}", meta_path.display());
    Ok(())
}

/// Run a full tolerance study and write `acf.csv`, `edf.csv`, `meta.json`.
pub(crate) fn run_tolerance_study(
    cfg: &ToleranceStudyConfig,
    out: &Path,
    quiet: bool,
) -> Result<()> {
    cfg.validate()?;
    note!(
        quiet,
        "tolerance study: {} variant{} x {} tolerance{} x {} dataset{}",
        cfg.variants.len(),
        plural(cfg.variants.len()),
        cfg.epsilon_grid.len(),
        plural(cfg.epsilon_grid.len()),
        cfg.datasets,
        plural(cfg.datasets)
    );
    let output = run_tolerance_study_inner(cfg)?;

    fs::create_dir_all(out)?;
    let mut guard = OutputGuard::new();
    let acf_path = guard.track(out.join("acf.csv"));
    let edf_path = guard.track(out.join("edf.csv"));
    let meta_path = guard.track(out.join("meta.json"));
    write_tolerance_outputs(&output, cfg, out)?;
    plot::read_acf_csv(&acf_path)?;
    plot::read_edf_csv(&edf_path)?;
    let _: serde_json::Value = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
    guard.commit();

    note!(
        quiet,
        "baseline eps {}: mean acceptance {:.3}",
        output.baseline.epsilon,
        output.baseline.mean_acceptance
    );
    for cell in &output.cells {
        let stuck = cell.stuck.iter().filter(|&&s| s).count();
        note!(
            quiet,
            "{}/{} eps {}: mean max EDF {:.4} ({} of {} chains stuck)",
            cell.weighting,
            cell.metric,
            cell.epsilon,
            cell.mean_max_edf,
            stuck,
            cell.stuck.len()
        );
    }
    for p in [&acf_path, &edf_path, &meta_path] {
        note!(quiet, "wrote {}", p.display());
    }
    Ok(())
}

// Thin indirection so this module's function can share the library name.
fn run_tolerance_study_inner(
    cfg: &ToleranceStudyConfig,
) -> Result<crate::harness::ToleranceStudyOutput> {
    run_tolerance_study(cfg)
}

/// Render charts from previously written tables.
pub(crate) fn run_plot(
    cfg: &PlotConfig,
    config_dir: &Path,
    out: &Path,
    quiet: bool,
) -> Result<()> {
    if cfg.ser_csv.is_none() && cfg.acf_csv.is_none() && cfg.edf_csv.is_none() {
        return Err(Error::Config(
            "plot configuration names no input tables (expected ser_csv, acf_csv, or edf_csv)"
                .into(),
        ));
    }
    let mut figures: Vec<Figure> = Vec::new();
    if let Some(input) = &cfg.ser_csv {
        let path = resolve_input(config_dir, input)?;
        let records = read_ser_csv(&path)?;
        note!(quiet, "read {} ({} row{})", path.display(), records.len(), plural(records.len()));
        figures.extend(plot::ser_figures(&records)?);
    }
    if let Some(input) = &cfg.acf_csv {
        let path = resolve_input(config_dir, input)?;
        let rows = plot::read_acf_csv(&path)?;
        note!(quiet, "read {} ({} row{})", path.display(), rows.len(), plural(rows.len()));
        figures.extend(plot::acf_figures(&rows)?);
    }
    if let Some(input) = &cfg.edf_csv {
        let path = resolve_input(config_dir, input)?;
        let rows = plot::read_edf_csv(&path)?;
        note!(quiet, "read {} ({} row{})", path.display(), rows.len(), plural(rows.len()));
        figures.push(plot::edf_figure(&rows)?);
    }

    fs::create_dir_all(out)?;
    let mut guard = OutputGuard::new();
    let mut written = Vec::new();
    for figure in &figures {
        let path = guard.track(out.join(&figure.name));
        fs::write(&path, figure.chart.to_svg())?;
        written.push(path);
    }
    for path in &written {
        let text = fs::read_to_string(path)?;
        if !(text.starts_with("<svg") && text.ends_with("</svg>\n")) {
            return Err(Error::Config(format!(
                "{}: not a complete SVG document",
                path.display()
            )));
        }
    }
    guard.commit();
    for path in &written {
        note!(quiet, "wrote {}", path.display());
    }
    Ok(())
}

fn resolve_input(config_dir: &Path, input: &Path) -> Result<PathBuf> {
    let path = if input.is_absolute() { input.to_path_buf() } else { config_dir.join(input) };
    if !path.is_file() {
        return Err(Error::Config(format!("{}: input table not found", path.display())));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RelayFunction, snr_to_noise};

    /// A system where the zero-forcing detector recovers every frame: linear
    /// relay, 60 dB SNR, and CSI error small enough to be irrelevant.
    fn noiseless_system() -> SystemConfig {
        let mut config = SystemConfig::default_setup(2).unwrap();
        config.relay = RelayFunction::linear();
        config.csi.sigma_g_sq = 1e-9;
        config.csi.sigma_h_sq = 1e-9;
        config.with_noise(snr_to_noise(60.0, &config.constellation).unwrap()).unwrap()
    }

    fn read_rows(path: &Path) -> Vec<Vec<String>> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn simulate_dumps_are_complete_and_deterministic() {
        let cfg = SimulateConfig {
            system: SystemConfig::default_setup(3).unwrap(),
            frames: 4,
            master_seed: 9,
        };
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        run_simulate(&cfg, &a, true).unwrap();
        run_simulate(&cfg, &b, true).unwrap();
        let first = fs::read(a.join("frames.csv")).unwrap();
        assert_eq!(first, fs::read(b.join("frames.csv")).unwrap());
        // 4 frames x 3 relays x 2 slots.
        assert_eq!(read_rows(&a.join("frames.csv")).len(), 24);

        let reseeded = SimulateConfig { master_seed: 10, ..cfg };
        let c = dir.path().join("c");
        run_simulate(&reseeded, &c, true).unwrap();
        assert_ne!(first, fs::read(c.join("frames.csv")).unwrap());
    }

    #[test]
    fn detect_reports_the_true_codeword_on_noiseless_frames() {
        let cfg = DetectConfig {
            system: noiseless_system(),
            detectors: vec![DetectionMethod::SesZf],
            frames: 6,
            abc: AbcSpec::default(),
            settings: SamplerSettings::standard(),
            tune: TuneOptions::default(),
            master_seed: 21,
        };
        let dir = tempfile::tempdir().unwrap();
        run_detect(&cfg, dir.path(), true).unwrap();
        let rows = read_rows(&dir.path().join("detections.csv"));
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert_eq!(row[1], "ses-zf");
            assert_eq!(row[2], row[3], "decision must equal the truth");
            assert_eq!(row[4], "0");
            assert_eq!(row[6], "ok");
        }
    }

    #[test]
    fn simulate_and_detect_see_identical_frames() {
        let system = noiseless_system();
        let dir = tempfile::tempdir().unwrap();
        let sim = SimulateConfig { system: system.clone(), frames: 5, master_seed: 77 };
        run_simulate(&sim, &dir.path().join("sim"), true).unwrap();
        let det = DetectConfig {
            system,
            detectors: vec![DetectionMethod::Omap],
            frames: 5,
            abc: AbcSpec::default(),
            settings: SamplerSettings::standard(),
            tune: TuneOptions::default(),
            master_seed: 77,
        };
        run_detect(&det, &dir.path().join("det"), true).unwrap();

        // Reassemble each frame's codeword from the dump (slot-indexed rows)
        // and compare with the truth column of the detection table.
        let sim_rows = read_rows(&dir.path().join("sim/frames.csv"));
        let det_rows = read_rows(&dir.path().join("det/detections.csv"));
        for f in 0..5 {
            let mut indices = vec![String::new(); 2];
            for row in sim_rows.iter().filter(|r| r[0] == f.to_string() && r[1] == "0") {
                indices[row[2].parse::<usize>().unwrap()] = row[3].clone();
            }
            let expected = indices.join("-");
            let truth = &det_rows[f][3];
            assert_eq!(truth, &expected, "frame {f}");
        }
    }

    #[test]
    fn tune_writes_a_schema_tagged_report_for_each_sampler() {
        let cfg = TuneConfig {
            system: SystemConfig::default_setup(2).unwrap(),
            samplers: vec![SamplerKind::Abc, SamplerKind::AuxiliaryVariable],
            abc: AbcSpec::default(),
            settings: SamplerSettings::new(300, 100).unwrap(),
            tune: TuneOptions { pilot_iterations: 60, max_pilots: 2, ..TuneOptions::default() },
            master_seed: 5,
        };
        let dir = tempfile::tempdir().unwrap();
        run_tune(&cfg, dir.path(), true).unwrap();
        let text = fs::read_to_string(dir.path().join("tuning.json")).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["schema"], "relaysim-tuning-v1");
        let results = parsed["results"].as_array().unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[0]["sampler"], "abc");
        assert_eq!(results[1]["sampler"], "auxiliary_variable");
        assert!(results[0]["outcome"]["scales"]["sigma_g_sq"].as_f64().unwrap() > 0.0);

        let dup = TuneConfig { samplers: vec![SamplerKind::Abc, SamplerKind::Abc], ..cfg };
        assert!(run_tune(&dup, dir.path(), true).is_err());
    }

    #[test]
    fn sweep_writes_validated_deterministic_artifacts() {
        let plan = ExperimentPlan::new(
            SystemConfig::default_setup(2).unwrap(),
            vec![1, 2],
            vec![10.0],
            3,
            vec![DetectionMethod::SesZf, DetectionMethod::Omap],
            2,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        run_sweep(&plan, &a, true).unwrap();
        run_sweep(&plan, &b, true).unwrap();
        assert_eq!(fs::read(a.join("ser.csv")).unwrap(), fs::read(b.join("ser.csv")).unwrap());
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(a.join("meta.json")).unwrap()).unwrap();
        assert_eq!(meta["schema"], "relaysim-sweep-meta-v1");
        // 2 relay counts x 1 SNR x 2 detectors.
        assert_eq!(read_rows(&a.join("ser.csv")).len(), 4);
    }

    #[test]
    fn plot_emits_one_polyline_per_detector_from_a_hand_written_table() {
        let dir = tempfile::tempdir().unwrap();
        let table = "\
l,snr_db,detector,frames,symbols_per_frame,symbol_errors,ser,failed_frames,config_fingerprint,seed
5,0,mcmc-abc,100,2,40,0.2,0,abcd,1
5,0,ses-zf,100,2,60,0.3,0,abcd,1
5,0,omap,100,2,20,0.1,0,abcd,1
";
        fs::write(dir.path().join("ser.csv"), table).unwrap();
        let cfg = PlotConfig {
            ser_csv: Some(PathBuf::from("ser.csv")),
            acf_csv: None,
            edf_csv: None,
        };
        let out = dir.path().join("plots");
        run_plot(&cfg, dir.path(), &out, true).unwrap();
        let svg = fs::read_to_string(out.join("ser_l5.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        for name in ["mcmc-abc", "ses-zf", "omap"] {
            assert!(svg.contains(name), "legend must name {name}");
        }
    }

    #[test]
    fn failed_plot_runs_remove_partial_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let table = "\
l,snr_db,detector,frames,symbols_per_frame,symbol_errors,ser,failed_frames,config_fingerprint,seed
2,0,ses-zf,100,2,40,0.2,0,abcd,1
5,0,ses-zf,100,2,60,0.3,0,abcd,1
";
        fs::write(dir.path().join("ser.csv"), table).unwrap();
        let cfg = PlotConfig {
            ser_csv: Some(PathBuf::from("ser.csv")),
            acf_csv: None,
            edf_csv: None,
        };
        let out = dir.path().join("plots");
        // Make the second figure unwritable: a directory squats on its name.
        fs::create_dir_all(out.join("ser_l5.svg")).unwrap();
        let err = run_plot(&cfg, dir.path(), &out, true).unwrap_err();
        assert!(matches!(err, Error::Io(_)), "{err}");
        assert!(
            !out.join("ser_l2.svg").exists(),
            "the partial first figure must be cleaned up"
        );
    }

    #[test]
    fn plot_requires_at_least_one_input_table() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PlotConfig::default();
        let err = run_plot(&cfg, dir.path(), &dir.path().join("o"), true).unwrap_err();
        assert!(err.to_string().contains("no input tables"), "{err}");

        let cfg = PlotConfig {
            ser_csv: Some(PathBuf::from("missing.csv")),
            acf_csv: None,
            edf_csv: None,
        };
        let err = run_plot(&cfg, dir.path(), &dir.path().join("o"), true).unwrap_err();
        assert!(err.to_string().contains("not found"), "{err}");
    }

    #[test]
    fn detection_table_validation_catches_tampering() {
        let cfg = DetectConfig {
            system: noiseless_system(),
            detectors: vec![DetectionMethod::SesZf],
            frames: 2,
            abc: AbcSpec::default(),
            settings: SamplerSettings::standard(),
            tune: TuneOptions::default(),
            master_seed: 3,
        };
        let dir = tempfile::tempdir().unwrap();
        run_detect(&cfg, dir.path(), true).unwrap();
        let path = dir.path().join("detections.csv");
        let good = fs::read_to_string(&path).unwrap();
        assert!(validate_detections_csv(&path, &cfg).is_ok());

        // An error count inconsistent with the decision must be caught.
        let tampered = good.replacen(",0,", ",1,", 1);
        assert_ne!(good, tampered);
        fs::write(&path, tampered).unwrap();
        assert!(validate_detections_csv(&path, &cfg).is_err());
    }
}
