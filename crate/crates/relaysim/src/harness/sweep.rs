//! Symbol-error-rate sweeps over an (L, SNR) grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abc::{AbcSpec, ResolvedAbcSpec};
use crate::detectors::{
    Detection, DetectionMethod, exact_map_known_channels, map_from_trace, omap_detect,
    ses_zf_detect,
};
use crate::error::Error;
use crate::fingerprint::short_fingerprint;
use crate::model::{
    ChannelRealization, FrameDraw, SystemConfig, draw_channels, simulate_forward_with,
    snr_to_noise,
};
use crate::rng::RngStream;
use crate::samplers::{
    SamplerKind, SamplerSettings, TuneOptions, TuneOutcome, run_mcmc_abc, run_mcmc_av,
    tune_proposals,
};
use crate::model::Codeword;
use crate::Result;

/// Sub-stream tags inside one cell stream. Frame `f` uses tag
/// `CELL_TAG_FRAME_BASE + f`.
const CELL_TAG_TUNING_FRAME: u64 = 0;
const CELL_TAG_ABC_RESOLVE: u64 = 1;
const CELL_TAG_ABC_TUNE: u64 = 2;
const CELL_TAG_AV_TUNE: u64 = 3;
const CELL_TAG_FRAME_BASE: u64 = 4;

/// Sub-stream tags inside one frame stream.
const FRAME_TAG_DRAW: u64 = 0;
const FRAME_TAG_ABC_CHAIN: u64 = 1;
const FRAME_TAG_AV_CHAIN: u64 = 2;

/// A full sweep description: the system under test, the grid, and every
/// knob that affects the result. Serializable as the JSON plan document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// System under test. Its CSI must carry at least `max(l_grid)` relay
    /// entries; each cell truncates to its own L. The noise block is
    /// overridden per cell from `snr_grid_db`.
    pub base: SystemConfig,
    /// Relay counts to sweep.
    pub l_grid: Vec<usize>,
    /// SNR grid in dB; converted to noise variances via the constellation
    /// energy, applied to both hops.
    pub snr_grid_db: Vec<f64>,
    /// Monte Carlo frames per (L, SNR) cell.
    pub frames_per_cell: usize,
    /// Detectors run on every frame.
    pub detectors: Vec<DetectionMethod>,
    /// Likelihood-free sampler configuration (used when `mcmc-abc` is in
    /// `detectors`).
    #[serde(default)]
    pub abc: AbcSpec,
    /// Chain length and scan configuration shared by both MCMC detectors;
    /// proposal scales are tuned per cell.
    #[serde(default = "SamplerSettings::standard")]
    pub settings: SamplerSettings,
    /// Proposal-scale tuning options, applied once per cell per sampler.
    #[serde(default)]
    pub tune: TuneOptions,
    /// Root of every random stream in the sweep.
    pub master_seed: u64,
}

impl ExperimentPlan {
    /// A plan over the given grids with library defaults everywhere else.
    pub fn new(
        base: SystemConfig,
        l_grid: Vec<usize>,
        snr_grid_db: Vec<f64>,
        frames_per_cell: usize,
        detectors: Vec<DetectionMethod>,
        master_seed: u64,
    ) -> Result<ExperimentPlan> {
        let plan = ExperimentPlan {
            base,
            l_grid,
            snr_grid_db,
            frames_per_cell,
            detectors,
            abc: AbcSpec::default(),
            settings: SamplerSettings::standard(),
            tune: TuneOptions::default(),
            master_seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Check grids, detector set, and every embedded configuration.
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.abc.validate()?;
        self.settings.validate()?;
        self.tune.validate()?;
        if self.l_grid.is_empty() || self.snr_grid_db.is_empty() {
            return Err(Error::invalid("both sweep grids must be non-empty"));
        }
        if self.frames_per_cell == 0 {
            return Err(Error::invalid("a sweep needs at least one frame per cell"));
        }
        if self.detectors.is_empty() {
            return Err(Error::invalid("a sweep needs at least one detector"));
        }
        for (i, d) in self.detectors.iter().enumerate() {
            if self.detectors[..i].contains(d) {
                return Err(Error::invalid(format!("detector {d} is listed twice")));
            }
        }
        if let Some(&l) = self.l_grid.iter().find(|&&l| l == 0) {
            return Err(Error::invalid(format!("relay count {l} is not positive")));
        }
        let max_l = *self.l_grid.iter().max().expect("non-empty grid");
        if self.base.csi.relays() < max_l {
            return Err(Error::invalid(format!(
                "the base CSI describes {} relays but the grid asks for {max_l}",
                self.base.csi.relays()
            )));
        }
        for &snr in &self.snr_grid_db {
            if !snr.is_finite() {
                return Err(Error::invalid(format!("SNR {snr} dB is not finite")));
            }
        }
        if self.detectors.contains(&DetectionMethod::ExactKnownChannel)
            && !self.base.relay.is_linear()
        {
            return Err(Error::invalid(
                "the exact-known-channel detector requires the linear relay",
            ));
        }
        Ok(())
    }

    /// Cells in sweep order: L-major, SNR-minor.
    pub fn cells(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.l_grid.len() * self.snr_grid_db.len());
        for &l in &self.l_grid {
            for &snr in &self.snr_grid_db {
                out.push((l, snr));
            }
        }
        out
    }

    /// The stream all of cell `cell_index`'s randomness descends from.
    /// Exposed so callers can reproduce any cell in isolation.
    pub fn cell_stream(&self, cell_index: usize) -> RngStream {
        RngStream::new(self.master_seed).derive(cell_index as u64)
    }

    /// The stream frame `frame` of a cell descends from.
    pub fn frame_stream(cell_stream: RngStream, frame: usize) -> RngStream {
        cell_stream.derive(CELL_TAG_FRAME_BASE + frame as u64)
    }
}

/// The detectors to run on each frame, with the chain configuration each
/// MCMC detector needs.
#[derive(Debug, Clone)]
pub struct DetectorSuite {
    detectors: Vec<DetectionMethod>,
    abc: Option<(ResolvedAbcSpec, SamplerSettings)>,
    av: Option<SamplerSettings>,
}

impl DetectorSuite {
    /// Bundle detectors with the chain configurations they require:
    /// `mcmc-abc` needs `abc`, `mcmc-av` needs `av`; both are ignored when
    /// the corresponding detector is absent.
    pub fn new(
        detectors: Vec<DetectionMethod>,
        abc: Option<(ResolvedAbcSpec, SamplerSettings)>,
        av: Option<SamplerSettings>,
    ) -> Result<DetectorSuite> {
        if detectors.is_empty() {
            return Err(Error::invalid("a detector suite cannot be empty"));
        }
        for (i, d) in detectors.iter().enumerate() {
            if detectors[..i].contains(d) {
                return Err(Error::invalid(format!("detector {d} is listed twice")));
            }
        }
        if detectors.contains(&DetectionMethod::McmcAbc) && abc.is_none() {
            return Err(Error::invalid(
                "the mcmc-abc detector needs a resolved acceptance spec and settings",
            ));
        }
        if detectors.contains(&DetectionMethod::McmcAv) && av.is_none() {
            return Err(Error::invalid("the mcmc-av detector needs sampler settings"));
        }
        if let Some((_, settings)) = &abc {
            settings.validate()?;
        }
        if let Some(settings) = &av {
            settings.validate()?;
        }
        Ok(DetectorSuite { detectors, abc, av })
    }

    /// The detectors, in the order their per-frame counts are reported.
    pub fn detectors(&self) -> &[DetectionMethod] {
        &self.detectors
    }
}

/// A tuned, ready-to-run detector suite plus the tuning outcomes that
/// produced it.
#[derive(Debug, Clone)]
pub struct PreparedSuite {
    /// The suite, with tuned proposal scales baked into its settings.
    pub suite: DetectorSuite,
    /// Likelihood-free chain tuning result (when `mcmc-abc` is requested).
    pub abc_tuning: Option<TuneOutcome>,
    /// Auxiliary-variable chain tuning result (when `mcmc-av` is requested).
    pub av_tuning: Option<TuneOutcome>,
}

/// Build a detector suite for one configuration: draw a pilot frame, resolve
/// the acceptance spec, and tune proposal scales for whichever chains the
/// detector list needs.
///
/// Sub-streams of `cell_stream` are consumed at fixed tags (pilot frame,
/// spec resolution, per-sampler tuning, then frames from
/// [`ExperimentPlan::frame_stream`]), so two callers with the same inputs
/// tune to identical suites.
pub fn prepare_suite(
    config: &SystemConfig,
    detectors: &[DetectionMethod],
    abc: &AbcSpec,
    settings: &SamplerSettings,
    tune: &TuneOptions,
    cell_stream: RngStream,
) -> Result<PreparedSuite> {
    let needs_abc = detectors.contains(&DetectionMethod::McmcAbc);
    let needs_av = detectors.contains(&DetectionMethod::McmcAv);

    // One pilot frame per cell; both samplers tune against it.
    let tuning_observation = if needs_abc || needs_av {
        let mut rng = cell_stream.derive(CELL_TAG_TUNING_FRAME).rng();
        let truth = config.prior.sample(&mut rng);
        let channels = draw_channels(&config.csi, &mut rng);
        let symbols = truth.symbols(&config.constellation);
        Some(simulate_forward_with(config, &symbols, &channels, &mut rng)?.y)
    } else {
        None
    };

    let mut abc_tuning = None;
    let abc_bundle = if needs_abc {
        let resolved = abc.resolve(config, cell_stream.derive(CELL_TAG_ABC_RESOLVE))?;
        let outcome = tune_proposals(
            SamplerKind::Abc,
            config,
            tuning_observation.as_ref().expect("drawn above"),
            Some(&resolved),
            settings,
            tune,
            cell_stream.derive(CELL_TAG_ABC_TUNE),
        )?;
        abc_tuning = Some(outcome);
        Some((resolved, settings.clone().with_scales(outcome.scales)))
    } else {
        None
    };
    let mut av_tuning = None;
    let av_settings = if needs_av {
        let outcome = tune_proposals(
            SamplerKind::AuxiliaryVariable,
            config,
            tuning_observation.as_ref().expect("drawn above"),
            None,
            settings,
            tune,
            cell_stream.derive(CELL_TAG_AV_TUNE),
        )?;
        av_tuning = Some(outcome);
        Some(settings.clone().with_scales(outcome.scales))
    } else {
        None
    };
    let suite = DetectorSuite::new(detectors.to_vec(), abc_bundle, av_settings)?;
    Ok(PreparedSuite { suite, abc_tuning, av_tuning })
}

/// What one simulated frame produced: the transmitted truth and, aligned
/// with the suite's detector order, each detector's symbol-error count
/// (`None` when that detector failed on this frame).
#[derive(Debug, Clone)]
pub struct FrameOutcome {
    /// The codeword actually transmitted.
    pub truth: Codeword,
    /// Per-detector symbol errors; `None` records a detector failure
    /// without dropping the frame.
    pub counts: Vec<Option<usize>>,
}

/// The ground truth of one simulated frame: what was sent, the realized
/// channels, and the relay-input noise plus destination observation.
#[derive(Debug, Clone)]
pub struct SimulatedFrame {
    /// The codeword actually transmitted.
    pub truth: Codeword,
    /// Realized first- and second-hop channels.
    pub channels: ChannelRealization,
    /// Observation and relay-input noise.
    pub draw: FrameDraw,
}

/// Draw one frame — codeword from the prior, channels from the CSI priors,
/// noise per the configuration — on the frame stream's draw sub-stream.
///
/// This is the exact draw [`run_frame`] detects on, so dumping frames with
/// this function and detecting on them with `run_frame` (same stream) lines
/// up one to one.
pub fn draw_frame(config: &SystemConfig, frame_stream: RngStream) -> Result<SimulatedFrame> {
    let mut rng = frame_stream.derive(FRAME_TAG_DRAW).rng();
    let truth = config.prior.sample(&mut rng);
    let channels = draw_channels(&config.csi, &mut rng);
    let symbols = truth.symbols(&config.constellation);
    let draw = simulate_forward_with(config, &symbols, &channels, &mut rng)?;
    Ok(SimulatedFrame { truth, channels, draw })
}

/// One simulated frame with every detector's full decision, aligned with
/// the suite's detector order.
#[derive(Debug)]
pub struct FrameDetections {
    /// The codeword actually transmitted.
    pub truth: Codeword,
    /// Each detector's decision, or the error that stopped it.
    pub detections: Vec<Result<Detection>>,
}

/// Simulate one frame (fresh symbols, channels, and noise) and run every
/// detector in the suite on it, keeping the full decisions.
///
/// All detectors see the same draw: the MCMC and zero-forcing detectors
/// get only the observation and the CSI statistics, the oracle detectors
/// additionally get the realized channels and relay noise. Randomness
/// splits into fixed sub-streams (frame draw, ABC chain, AV chain), so
/// adding or removing detectors never changes the frame itself.
pub fn run_frame_detailed(
    config: &SystemConfig,
    suite: &DetectorSuite,
    stream: RngStream,
) -> Result<FrameDetections> {
    let frame = draw_frame(config, stream)?;
    let SimulatedFrame { truth, channels, draw } = frame;

    let mut detections = Vec::with_capacity(suite.detectors.len());
    for method in &suite.detectors {
        let detection = match method {
            DetectionMethod::McmcAbc => {
                let (spec, settings) = suite.abc.as_ref().expect("validated at construction");
                run_mcmc_abc(config, &draw.y, spec, settings, stream.derive(FRAME_TAG_ABC_CHAIN))
                    .and_then(|trace| map_from_trace(&trace, settings.burn_in))
            }
            DetectionMethod::McmcAv => {
                let settings = suite.av.as_ref().expect("validated at construction");
                run_mcmc_av(config, &draw.y, settings, stream.derive(FRAME_TAG_AV_CHAIN))
                    .and_then(|trace| map_from_trace(&trace, settings.burn_in))
            }
            DetectionMethod::SesZf => ses_zf_detect(config, &draw.y, &config.csi),
            DetectionMethod::Omap => omap_detect(config, &draw.y, &channels, &draw.w),
            DetectionMethod::ExactKnownChannel => {
                exact_map_known_channels(config, &draw.y, &channels)
            }
        };
        detections.push(detection);
    }
    Ok(FrameDetections { truth, detections })
}

/// Like [`run_frame_detailed`], reduced to per-detector symbol-error counts.
pub fn run_frame(
    config: &SystemConfig,
    suite: &DetectorSuite,
    stream: RngStream,
) -> Result<FrameOutcome> {
    let detailed = run_frame_detailed(config, suite, stream)?;
    let counts = detailed
        .detections
        .iter()
        .map(|d| d.as_ref().ok().map(|d| detailed.truth.symbol_errors(&d.s_hat)))
        .collect();
    Ok(FrameOutcome { truth: detailed.truth, counts })
}

/// One detector's aggregate over one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerRecord {
    /// Relay count of the cell.
    pub l: usize,
    /// SNR of the cell in dB.
    pub snr_db: f64,
    /// Which detector.
    pub detector: DetectionMethod,
    /// Frames simulated.
    pub frames: usize,
    /// Symbols per frame, the K in the error-rate denominator.
    pub symbols_per_frame: usize,
    /// Total symbol errors over all frames.
    pub symbol_errors: usize,
    /// `symbol_errors / (frames * symbols_per_frame)`.
    pub ser: f64,
    /// Frames on which this detector returned an error (their symbols are
    /// not counted as errors; a nonzero value flags the record).
    pub failed_frames: usize,
    /// Fingerprint of the cell's full `SystemConfig`.
    pub config_fingerprint: String,
    /// The sweep's master seed.
    pub seed: u64,
}

/// Tuning results and the noise mapping for one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    /// Relay count.
    pub l: usize,
    /// SNR in dB.
    pub snr_db: f64,
    /// Relay-input noise variance implied by the SNR.
    pub sigma_w_sq: f64,
    /// Destination noise variance implied by the SNR.
    pub sigma_v_sq: f64,
    /// Proposal tuning for the likelihood-free chain, when it ran.
    pub abc_tuning: Option<TuneOutcome>,
    /// Proposal tuning for the auxiliary-variable chain, when it ran.
    pub av_tuning: Option<TuneOutcome>,
}

/// Everything a sweep produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    /// One record per (cell, detector), in cell order then detector order.
    pub records: Vec<SerRecord>,
    /// One report per cell, in cell order.
    pub cells: Vec<CellReport>,
    /// Fingerprint of the plan that produced this output.
    pub plan_fingerprint: String,
}

/// Run the full sweep: for every (L, SNR) cell, tune proposals once, then
/// simulate `frames_per_cell` independent frames and aggregate per-detector
/// symbol-error counts.
///
/// Frames run in parallel; determinism is preserved because every frame's
/// randomness is derived from `(master_seed, cell index, frame index)` and
/// integer error counts are summed order-independently.
pub fn run_ser_sweep(plan: &ExperimentPlan) -> Result<SweepOutput> {
    plan.validate()?;

    let mut records = Vec::new();
    let mut cells = Vec::new();
    for (cell_index, (l, snr_db)) in plan.cells().into_iter().enumerate() {
        let noise = snr_to_noise(snr_db, &plan.base.constellation)?;
        let config = plan.base.with_relays(l)?.with_noise(noise)?;
        let cell_stream = plan.cell_stream(cell_index);

        let PreparedSuite { suite, abc_tuning, av_tuning } = prepare_suite(
            &config,
            &plan.detectors,
            &plan.abc,
            &plan.settings,
            &plan.tune,
            cell_stream,
        )?;

        let outcomes: Vec<FrameOutcome> = (0..plan.frames_per_cell)
            .into_par_iter()
            .map(|frame| {
                run_frame(&config, &suite, ExperimentPlan::frame_stream(cell_stream, frame))
            })
            .collect::<Result<_>>()?;

        let k = config.prior.k();
        let fingerprint = short_fingerprint(&config)?;
        for (d_index, &detector) in plan.detectors.iter().enumerate() {
            let mut symbol_errors = 0usize;
            let mut failed_frames = 0usize;
            for outcome in &outcomes {
                match outcome.counts[d_index] {
                    Some(errors) => symbol_errors += errors,
                    None => failed_frames += 1,
                }
            }
            records.push(SerRecord {
                l,
                snr_db,
                detector,
                frames: plan.frames_per_cell,
                symbols_per_frame: k,
                symbol_errors,
                ser: symbol_errors as f64 / (plan.frames_per_cell * k) as f64,
                failed_frames,
                config_fingerprint: fingerprint.clone(),
                seed: plan.master_seed,
            });
        }
        cells.push(CellReport {
            l,
            snr_db,
            sigma_w_sq: noise.sigma_w_sq,
            sigma_v_sq: noise.sigma_v_sq,
            abc_tuning,
            av_tuning,
        });
    }
    Ok(SweepOutput { records, cells, plan_fingerprint: short_fingerprint(plan)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_plan(detectors: Vec<DetectionMethod>) -> ExperimentPlan {
        let base = SystemConfig::default_setup(2).unwrap();
        let mut plan =
            ExperimentPlan::new(base, vec![1, 2], vec![10.0], 4, detectors, 7).unwrap();
        plan.settings = SamplerSettings::new(600, 150).unwrap();
        plan.tune.pilot_iterations = 400;
        plan.tune.max_pilots = 4;
        plan
    }

    #[test]
    fn oracle_detectors_are_error_free_in_the_noiseless_limit() {
        // At 60 dB with a linear relay, detectors that condition on the true
        // channels recover every frame even with full CSI uncertainty.
        let mut config = SystemConfig::default_setup(2).unwrap();
        config.relay = crate::model::RelayFunction::linear();
        let config =
            config.with_noise(snr_to_noise(60.0, &config.constellation).unwrap()).unwrap();
        let suite = DetectorSuite::new(
            vec![DetectionMethod::Omap, DetectionMethod::ExactKnownChannel],
            None,
            None,
        )
        .unwrap();
        let stream = RngStream::new(11);
        let mut total = 0usize;
        for frame in 0..100 {
            let outcome = run_frame(&config, &suite, stream.derive(frame)).unwrap();
            for count in &outcome.counts {
                total += count.expect("no detector failures expected");
            }
        }
        assert_eq!(total, 0);
    }

    #[test]
    fn estimate_based_detectors_are_error_free_once_csi_error_also_vanishes() {
        // The zero-forcing detector keeps a mismatch floor as long as the
        // realized channels differ from the estimates it plugs in, so the
        // noiseless limit for it includes vanishing estimation error.
        let mut config = SystemConfig::default_setup(2).unwrap();
        config.relay = crate::model::RelayFunction::linear();
        config.csi.sigma_g_sq = 1e-9;
        config.csi.sigma_h_sq = 1e-9;
        let config =
            config.with_noise(snr_to_noise(60.0, &config.constellation).unwrap()).unwrap();
        let av_settings = SamplerSettings {
            clamp_channels: true,
            clamp_relay_noise: true,
            ..SamplerSettings::new(2_000, 500).unwrap()
        };
        let suite = DetectorSuite::new(
            vec![DetectionMethod::SesZf, DetectionMethod::McmcAv],
            None,
            Some(av_settings),
        )
        .unwrap();
        let stream = RngStream::new(13);
        let mut total = 0usize;
        for frame in 0..50 {
            let outcome = run_frame(&config, &suite, stream.derive(frame)).unwrap();
            for count in &outcome.counts {
                total += count.expect("no detector failures expected");
            }
        }
        assert_eq!(total, 0);
    }

    #[test]
    fn the_zero_forcing_mismatch_floor_survives_high_snr() {
        // With full CSI uncertainty the zero-forcing detector's errors do
        // not vanish at high SNR — the floor the sweep exists to measure.
        let mut config = SystemConfig::default_setup(5).unwrap();
        config.relay = crate::model::RelayFunction::linear();
        let config =
            config.with_noise(snr_to_noise(60.0, &config.constellation).unwrap()).unwrap();
        let suite =
            DetectorSuite::new(vec![DetectionMethod::SesZf, DetectionMethod::Omap], None, None)
                .unwrap();
        let stream = RngStream::new(17);
        let mut zf = 0usize;
        let mut omap = 0usize;
        for frame in 0..400 {
            let outcome = run_frame(&config, &suite, stream.derive(frame)).unwrap();
            zf += outcome.counts[0].unwrap();
            omap += outcome.counts[1].unwrap();
        }
        assert_eq!(omap, 0);
        assert!(zf > 0, "expected a nonzero mismatch floor");
    }

    #[test]
    fn rerunning_a_sweep_reproduces_it_exactly() {
        let plan = fast_plan(vec![
            DetectionMethod::McmcAbc,
            DetectionMethod::SesZf,
            DetectionMethod::Omap,
        ]);
        let first = run_ser_sweep(&plan).unwrap();
        let second = run_ser_sweep(&plan).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn thread_count_does_not_change_the_records() {
        let plan = fast_plan(vec![DetectionMethod::McmcAbc, DetectionMethod::Omap]);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_ser_sweep(&plan))
            .unwrap();
        let pooled = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| run_ser_sweep(&plan))
            .unwrap();
        assert_eq!(single, pooled);
    }

    #[test]
    fn a_single_cell_sweep_is_plain_frame_aggregation() {
        // Rebuilding the cell's suite from the recorded tuning and walking
        // the documented stream derivation reproduces the record.
        let base = SystemConfig::default_setup(2).unwrap();
        let mut plan = ExperimentPlan::new(
            base,
            vec![2],
            vec![12.0],
            6,
            vec![DetectionMethod::McmcAv, DetectionMethod::SesZf],
            21,
        )
        .unwrap();
        plan.settings = SamplerSettings::new(500, 100).unwrap();
        plan.tune.pilot_iterations = 300;
        plan.tune.max_pilots = 3;
        let output = run_ser_sweep(&plan).unwrap();

        let noise = snr_to_noise(12.0, &plan.base.constellation).unwrap();
        let config = plan.base.with_relays(2).unwrap().with_noise(noise).unwrap();
        let tuned = output.cells[0].av_tuning.unwrap();
        let suite = DetectorSuite::new(
            plan.detectors.clone(),
            None,
            Some(plan.settings.clone().with_scales(tuned.scales)),
        )
        .unwrap();
        let cell_stream = plan.cell_stream(0);
        let mut av_errors = 0usize;
        let mut zf_errors = 0usize;
        for frame in 0..plan.frames_per_cell {
            let outcome =
                run_frame(&config, &suite, ExperimentPlan::frame_stream(cell_stream, frame))
                    .unwrap();
            av_errors += outcome.counts[0].unwrap();
            zf_errors += outcome.counts[1].unwrap();
        }
        assert_eq!(output.records[0].symbol_errors, av_errors);
        assert_eq!(output.records[1].symbol_errors, zf_errors);
        assert_eq!(output.records[0].ser, av_errors as f64 / 12.0);
    }

    #[test]
    fn plans_are_validated() {
        let base = SystemConfig::default_setup(2).unwrap();
        // Empty grid.
        assert!(
            ExperimentPlan::new(
                base.clone(),
                vec![],
                vec![10.0],
                4,
                vec![DetectionMethod::SesZf],
                1
            )
            .is_err()
        );
        // More relays than the CSI describes.
        assert!(
            ExperimentPlan::new(
                base.clone(),
                vec![5],
                vec![10.0],
                4,
                vec![DetectionMethod::SesZf],
                1
            )
            .is_err()
        );
        // Duplicate detector.
        assert!(
            ExperimentPlan::new(
                base.clone(),
                vec![2],
                vec![10.0],
                4,
                vec![DetectionMethod::SesZf, DetectionMethod::SesZf],
                1
            )
            .is_err()
        );
        // Exact posterior needs the linear relay.
        assert!(
            ExperimentPlan::new(
                base.clone(),
                vec![2],
                vec![10.0],
                4,
                vec![DetectionMethod::ExactKnownChannel],
                1
            )
            .is_err()
        );
        // Zero frames.
        assert!(
            ExperimentPlan::new(base, vec![2], vec![10.0], 0, vec![DetectionMethod::SesZf], 1)
                .is_err()
        );
    }

    #[test]
    fn suite_construction_requires_chain_settings() {
        assert!(DetectorSuite::new(vec![DetectionMethod::McmcAbc], None, None).is_err());
        assert!(DetectorSuite::new(vec![DetectionMethod::McmcAv], None, None).is_err());
        assert!(DetectorSuite::new(vec![], None, None).is_err());
        assert!(
            DetectorSuite::new(
                vec![DetectionMethod::Omap],
                None,
                Some(SamplerSettings::standard())
            )
            .is_ok()
        );
    }

    #[test]
    fn detector_failures_are_recorded_not_dropped() {
        // An exact-known-channel detector on a nonlinear relay fails on
        // every frame; the sweep records the failures and keeps going.
        let config = SystemConfig::default_setup(2).unwrap();
        assert!(!config.relay.is_linear());
        let suite = DetectorSuite::new(
            vec![DetectionMethod::ExactKnownChannel, DetectionMethod::SesZf],
            None,
            None,
        )
        .unwrap();
        let outcome = run_frame(&config, &suite, RngStream::new(5)).unwrap();
        assert_eq!(outcome.counts[0], None);
        assert!(outcome.counts[1].is_some());
    }

    #[test]
    fn cell_noise_follows_the_snr_grid() {
        let base = SystemConfig::default_setup(1).unwrap();
        let plan = ExperimentPlan::new(
            base,
            vec![1],
            vec![0.0, 20.0],
            1,
            vec![DetectionMethod::SesZf],
            3,
        )
        .unwrap();
        let output = run_ser_sweep(&plan).unwrap();
        let expected_low = snr_to_noise(0.0, &plan.base.constellation).unwrap();
        let expected_high = snr_to_noise(20.0, &plan.base.constellation).unwrap();
        assert_eq!(output.cells[0].sigma_v_sq, expected_low.sigma_v_sq);
        assert_eq!(output.cells[1].sigma_v_sq, expected_high.sigma_v_sq);
        // 20 dB is a factor of 100 in noise power.
        let ratio = output.cells[0].sigma_v_sq / output.cells[1].sigma_v_sq;
        assert!((ratio - 100.0).abs() < 1e-9);
    }
}
