//! The tolerance study: how the ABC tolerance, weighting kernel, and
//! distance metric trade posterior accuracy against chain mixing.
//!
//! Protocol: a long soft-weighted Mahalanobis chain at a tight baseline
//! tolerance provides the reference ("true") empirical distribution of a
//! channel coordinate. Shorter chains are then run at each tolerance in a
//! grid, for every (weighting, metric) variant under test, with proposal
//! scales tuned per tolerance on the soft/Mahalanobis combination and
//! shared across variants. Each variant chain is scored by the maximal
//! discrepancy between its EDF and the baseline EDF, and by the
//! autocorrelation decay of the channel coordinate; everything is averaged
//! over independently regenerated datasets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abc::{AbcSpec, MetricSpec, ResolvedAbcSpec, SummarySpec, WeightKind};
use crate::diagnostics::{Edf, ScalarSeries, acf_profile, edf_max_distance};
use crate::error::Error;
use crate::fingerprint::short_fingerprint;
use crate::model::{Observation, SystemConfig, draw_channels, simulate_forward_with};
use crate::rng::RngStream;
use crate::samplers::{
    SamplerKind, SamplerSettings, TraceScalar, TuneOptions, TuneOutcome, run_mcmc_abc,
    tune_proposals,
};
use crate::Result;

/// Master-stream tags.
const STUDY_TAG_RESOLVE: u64 = 1;
const STUDY_TAG_BASELINE_TUNE: u64 = 2;
const STUDY_TAG_EPSILON_TUNE_BASE: u64 = 3;
const STUDY_TAG_DATASET_BASE: u64 = 100;

/// Dataset-stream tags.
const DATASET_TAG_DRAW: u64 = 0;
const DATASET_TAG_BASELINE_CHAIN: u64 = 1;
const DATASET_TAG_CELL_BASE: u64 = 10;

/// One weighting/metric combination under study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcVariant {
    /// Kernel shape.
    pub weighting: WeightKind,
    /// Distance metric.
    pub metric: MetricSpec,
}

impl AbcVariant {
    /// The four combinations the study compares by default: hard and soft
    /// kernels, each with the Mahalanobis and scaled Euclidean metrics.
    pub fn standard_comparison() -> Vec<AbcVariant> {
        vec![
            AbcVariant { weighting: WeightKind::Soft, metric: MetricSpec::Mahalanobis },
            AbcVariant { weighting: WeightKind::Soft, metric: MetricSpec::ScaledEuclidean },
            AbcVariant { weighting: WeightKind::Hard, metric: MetricSpec::Mahalanobis },
            AbcVariant { weighting: WeightKind::Hard, metric: MetricSpec::ScaledEuclidean },
        ]
    }
}

fn default_datasets() -> usize {
    20
}
fn default_epsilon_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}
fn default_baseline_epsilon() -> f64 {
    0.2
}
fn default_baseline_iterations() -> usize {
    100_000
}
fn default_baseline_burn_in() -> usize {
    10_000
}
fn default_grid_iterations() -> usize {
    20_000
}
fn default_grid_burn_in() -> usize {
    5_000
}
fn default_n_synthetic() -> usize {
    1
}
fn default_max_lag() -> usize {
    200
}

/// The study's tuner aims for the lower acceptance band the protocol keeps
/// its chains in, rather than the wider band detection runs use.
fn default_study_tune() -> TuneOptions {
    TuneOptions { target_low: 0.1, target_high: 0.3, ..TuneOptions::default() }
}

/// Full description of a tolerance study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToleranceStudyConfig {
    /// System under study (relay count, noise, prior all taken as-is).
    pub base: SystemConfig,
    /// Independently regenerated datasets to average over.
    #[serde(default = "default_datasets")]
    pub datasets: usize,
    /// Tolerances compared.
    #[serde(default = "default_epsilon_grid")]
    pub epsilon_grid: Vec<f64>,
    /// The baseline chain's tolerance floor.
    #[serde(default = "default_baseline_epsilon")]
    pub baseline_epsilon: f64,
    /// Baseline chain length.
    #[serde(default = "default_baseline_iterations")]
    pub baseline_iterations: usize,
    /// Baseline burn-in; must cover the tolerance anneal.
    #[serde(default = "default_baseline_burn_in")]
    pub baseline_burn_in: usize,
    /// Grid chain length.
    #[serde(default = "default_grid_iterations")]
    pub grid_iterations: usize,
    /// Grid chain burn-in.
    #[serde(default = "default_grid_burn_in")]
    pub grid_burn_in: usize,
    /// Weighting/metric combinations compared.
    #[serde(default = "AbcVariant::standard_comparison")]
    pub variants: Vec<AbcVariant>,
    /// Summary statistic shared by every chain.
    #[serde(default)]
    pub summary: SummarySpec,
    /// Synthetic frames per proposal.
    #[serde(default = "default_n_synthetic")]
    pub n_synthetic: usize,
    /// Proposal tuning options (per-tolerance, on the soft/Mahalanobis
    /// combination).
    #[serde(default = "default_study_tune")]
    pub tune: TuneOptions,
    /// Longest autocorrelation lag tabulated.
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    /// Root of every random stream in the study.
    pub master_seed: u64,
}

impl ToleranceStudyConfig {
    /// The standard study on the given system.
    pub fn standard(base: SystemConfig, master_seed: u64) -> Result<ToleranceStudyConfig> {
        let config = ToleranceStudyConfig {
            base,
            datasets: default_datasets(),
            epsilon_grid: default_epsilon_grid(),
            baseline_epsilon: default_baseline_epsilon(),
            baseline_iterations: default_baseline_iterations(),
            baseline_burn_in: default_baseline_burn_in(),
            grid_iterations: default_grid_iterations(),
            grid_burn_in: default_grid_burn_in(),
            variants: AbcVariant::standard_comparison(),
            summary: SummarySpec::default(),
            n_synthetic: default_n_synthetic(),
            tune: default_study_tune(),
            max_lag: default_max_lag(),
            master_seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Check grids, chain lengths, and every embedded configuration.
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.summary.validate()?;
        self.tune.validate()?;
        if self.datasets == 0 {
            return Err(Error::invalid("the study needs at least one dataset"));
        }
        if self.epsilon_grid.is_empty() {
            return Err(Error::invalid("the tolerance grid must be non-empty"));
        }
        for &eps in &self.epsilon_grid {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::invalid(format!("tolerance {eps} must be finite and > 0")));
            }
        }
        if !self.baseline_epsilon.is_finite() || self.baseline_epsilon <= 0.0 {
            return Err(Error::invalid("the baseline tolerance must be finite and > 0"));
        }
        if self.variants.is_empty() {
            return Err(Error::invalid("the study needs at least one variant"));
        }
        for (i, v) in self.variants.iter().enumerate() {
            if self.variants[..i].contains(v) {
                return Err(Error::invalid(format!(
                    "variant ({}, {}) is listed twice",
                    v.weighting, v.metric
                )));
            }
        }
        if self.n_synthetic == 0 {
            return Err(Error::invalid("at least one synthetic frame per proposal is needed"));
        }
        SamplerSettings::new(self.baseline_iterations, self.baseline_burn_in)?;
        SamplerSettings::new(self.grid_iterations, self.grid_burn_in)?;
        // The annealed tolerance reaches its floor after about N/10
        // iterations; estimates read past burn-in must not see the anneal.
        if self.baseline_burn_in * 10 < self.baseline_iterations {
            return Err(Error::invalid(format!(
                "a baseline burn-in of {} does not cover the tolerance anneal of a {}-iteration chain",
                self.baseline_burn_in, self.baseline_iterations
            )));
        }
        if self.grid_burn_in * 10 < self.grid_iterations {
            return Err(Error::invalid(format!(
                "a grid burn-in of {} does not cover the tolerance anneal of a {}-iteration chain",
                self.grid_burn_in, self.grid_iterations
            )));
        }
        let shortest_tail =
            (self.grid_iterations - self.grid_burn_in).min(self.baseline_iterations - self.baseline_burn_in);
        if self.max_lag >= shortest_tail {
            return Err(Error::invalid(format!(
                "maximum lag {} is not below the shortest post-burn-in length {shortest_tail}",
                self.max_lag
            )));
        }
        if self.base.csi.relays() == 0 {
            return Err(Error::invalid("the study tracks the first relay's channels"));
        }
        Ok(())
    }
}

/// A mean autocorrelation curve for one scalar chain coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfCurve {
    /// Coordinate label (`g1_re`, `h1_re`).
    pub component: String,
    /// Autocorrelation at lags `0..=max_lag`, averaged over datasets.
    pub values: Vec<f64>,
}

/// Results for one (variant, tolerance) cell across all datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantCell {
    /// Kernel shape.
    pub weighting: WeightKind,
    /// Distance metric.
    pub metric: MetricSpec,
    /// Tolerance floor this cell ran at.
    pub epsilon: f64,
    /// Per-dataset maximal EDF discrepancy against the baseline.
    pub max_edf: Vec<f64>,
    /// Per-dataset stuck-chain flags (no acceptance in the final window).
    pub stuck: Vec<bool>,
    /// Mean of `max_edf`.
    pub mean_max_edf: f64,
    /// Mean autocorrelation curves of the tracked channel coordinates. A
    /// stuck (constant) chain contributes a flat curve of ones — the
    /// no-mixing limit.
    pub acf: Vec<AcfCurve>,
}

/// The baseline chain's aggregate behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    /// Baseline tolerance floor.
    pub epsilon: f64,
    /// Per-dataset post-burn-in acceptance rates.
    pub acceptance: Vec<f64>,
    /// Mean of `acceptance`.
    pub mean_acceptance: f64,
    /// Mean autocorrelation curves, as in [`VariantCell::acf`].
    pub acf: Vec<AcfCurve>,
    /// How the baseline's proposal scales were found.
    pub tuning: TuneOutcome,
}

/// Proposal scales found for one grid tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonTuning {
    /// The tolerance.
    pub epsilon: f64,
    /// The tuning result whose scales every variant at this tolerance uses.
    pub outcome: TuneOutcome,
}

/// Everything a tolerance study produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceStudyOutput {
    /// One cell per (variant, tolerance), variant-major in config order.
    pub cells: Vec<VariantCell>,
    /// The baseline chain's behaviour.
    pub baseline: BaselineReport,
    /// Per-tolerance tuned scales.
    pub scales: Vec<EpsilonTuning>,
    /// Fingerprint of the study configuration.
    pub config_fingerprint: String,
}

/// The two chain coordinates whose mixing the study tracks.
const TRACKED: [(TraceScalar, &str); 2] =
    [(TraceScalar::GRe(0), "g1_re"), (TraceScalar::HRe(0), "h1_re")];

/// Reduction of one chain: EDF source series, stuck flag, ACF curves.
struct ChainDigest {
    series: Vec<f64>,
    stuck: bool,
    acf: Vec<Vec<f64>>,
    acceptance: f64,
}

fn digest_chain(
    config: &SystemConfig,
    observation: &Observation,
    spec: &ResolvedAbcSpec,
    settings: &SamplerSettings,
    max_lag: usize,
    stream: RngStream,
) -> Result<ChainDigest> {
    let trace = run_mcmc_abc(config, observation, spec, settings, stream)?;
    let series = trace.post_burn_in_series(TRACKED[0].0);
    let mut acf = Vec::with_capacity(TRACKED.len());
    for (scalar, _) in TRACKED {
        let coordinate = trace.post_burn_in_series(scalar);
        let profile = match ScalarSeries::new(coordinate).and_then(|s| acf_profile(&s, max_lag)) {
            Ok(p) => p,
            // A constant (stuck) coordinate has no defined autocorrelation;
            // it enters the average as the flat no-mixing curve.
            Err(Error::NumericDomain(_)) => vec![1.0; max_lag + 1],
            Err(e) => return Err(e),
        };
        acf.push(profile);
    }
    Ok(ChainDigest {
        series,
        stuck: trace.is_stuck(),
        acf,
        acceptance: trace.acceptance_rate_post_burn_in(),
    })
}

/// What one dataset contributes to the aggregate.
struct DatasetReduction {
    baseline_acceptance: f64,
    baseline_acf: Vec<Vec<f64>>,
    /// Per (variant, epsilon) cell: (max EDF vs baseline, stuck, ACF curves).
    cells: Vec<(f64, bool, Vec<Vec<f64>>)>,
}

/// Run the study. Returns per-(variant, tolerance) EDF discrepancies and
/// autocorrelation curves averaged over the configured number of datasets,
/// along with the baseline behaviour and all tuned scales.
///
/// Datasets run in parallel; each one's randomness descends from
/// `(master_seed, dataset index)`, so the output is byte-identical across
/// thread counts. Stuck chains are flagged, not discarded.
pub fn run_tolerance_study(study: &ToleranceStudyConfig) -> Result<ToleranceStudyOutput> {
    study.validate()?;
    let master = RngStream::new(study.master_seed);
    let config = &study.base;

    // Resolve all metric evaluators from one covariance stream so every
    // variant sees the same summary-covariance estimate.
    let resolve = |weighting: WeightKind, metric: MetricSpec, epsilon: f64| -> Result<ResolvedAbcSpec> {
        AbcSpec {
            summary: study.summary.clone(),
            metric,
            weighting,
            epsilon_min: epsilon,
            n_synthetic: study.n_synthetic,
            refresh_current_distance: false,
            ..AbcSpec::default()
        }
        .resolve(config, master.derive(STUDY_TAG_RESOLVE))
    };
    let baseline_spec =
        resolve(WeightKind::Soft, MetricSpec::Mahalanobis, study.baseline_epsilon)?;
    let mut variant_specs = Vec::with_capacity(study.variants.len());
    for variant in &study.variants {
        // Tolerance is substituted per grid cell below.
        variant_specs.push(resolve(variant.weighting, variant.metric.clone(), study.baseline_epsilon)?);
    }

    // One tuning observation, shared by every tuning run: dataset 0's draw.
    let tuning_observation = dataset_observation(config, master, 0)?;

    let baseline_core = SamplerSettings::new(study.baseline_iterations, study.baseline_burn_in)?;
    let baseline_tuning = tune_proposals(
        SamplerKind::Abc,
        config,
        &tuning_observation,
        Some(&baseline_spec),
        &baseline_core,
        &study.tune,
        master.derive(STUDY_TAG_BASELINE_TUNE),
    )?;
    let baseline_settings = baseline_core.with_scales(baseline_tuning.scales);

    let grid_core = SamplerSettings::new(study.grid_iterations, study.grid_burn_in)?;
    let mut scales = Vec::with_capacity(study.epsilon_grid.len());
    let mut grid_settings = Vec::with_capacity(study.epsilon_grid.len());
    for (ei, &epsilon) in study.epsilon_grid.iter().enumerate() {
        let mut spec = baseline_spec.clone();
        spec.epsilon_min = epsilon;
        let outcome = tune_proposals(
            SamplerKind::Abc,
            config,
            &tuning_observation,
            Some(&spec),
            &grid_core,
            &study.tune,
            master.derive(STUDY_TAG_EPSILON_TUNE_BASE + ei as u64),
        )?;
        scales.push(EpsilonTuning { epsilon, outcome });
        grid_settings.push(grid_core.clone().with_scales(outcome.scales));
    }

    let reductions: Vec<DatasetReduction> = (0..study.datasets)
        .into_par_iter()
        .map(|d| -> Result<DatasetReduction> {
            let dataset_stream = master.derive(STUDY_TAG_DATASET_BASE + d as u64);
            let observation = dataset_observation(config, master, d)?;
            let baseline = digest_chain(
                config,
                &observation,
                &baseline_spec,
                &baseline_settings,
                study.max_lag,
                dataset_stream.derive(DATASET_TAG_BASELINE_CHAIN),
            )?;
            let baseline_edf = Edf::from_samples(&baseline.series)?;
            let mut cells = Vec::with_capacity(study.variants.len() * study.epsilon_grid.len());
            for (vi, _) in study.variants.iter().enumerate() {
                for (ei, &epsilon) in study.epsilon_grid.iter().enumerate() {
                    let mut spec = variant_specs[vi].clone();
                    spec.epsilon_min = epsilon;
                    let cell_tag =
                        DATASET_TAG_CELL_BASE + (vi * study.epsilon_grid.len() + ei) as u64;
                    let digest = digest_chain(
                        config,
                        &observation,
                        &spec,
                        &grid_settings[ei],
                        study.max_lag,
                        dataset_stream.derive(cell_tag),
                    )?;
                    let edf = Edf::from_samples(&digest.series)?;
                    cells.push((edf_max_distance(&edf, &baseline_edf), digest.stuck, digest.acf));
                }
            }
            Ok(DatasetReduction {
                baseline_acceptance: baseline.acceptance,
                baseline_acf: baseline.acf,
                cells,
            })
        })
        .collect::<Result<_>>()?;

    // Fold datasets into per-cell aggregates.
    let n_cells = study.variants.len() * study.epsilon_grid.len();
    let lags = study.max_lag + 1;
    let mut cells = Vec::with_capacity(n_cells);
    for (vi, variant) in study.variants.iter().enumerate() {
        for (ei, &epsilon) in study.epsilon_grid.iter().enumerate() {
            let index = vi * study.epsilon_grid.len() + ei;
            let mut max_edf = Vec::with_capacity(study.datasets);
            let mut stuck = Vec::with_capacity(study.datasets);
            let mut acf_sum = vec![vec![0.0f64; lags]; TRACKED.len()];
            for reduction in &reductions {
                let (edf, was_stuck, acf) = &reduction.cells[index];
                max_edf.push(*edf);
                stuck.push(*was_stuck);
                for (sum, curve) in acf_sum.iter_mut().zip(acf) {
                    for (s, v) in sum.iter_mut().zip(curve) {
                        *s += v;
                    }
                }
            }
            let mean_max_edf = max_edf.iter().sum::<f64>() / study.datasets as f64;
            let acf = TRACKED
                .iter()
                .zip(acf_sum)
                .map(|((_, label), sum)| AcfCurve {
                    component: (*label).to_string(),
                    values: sum.into_iter().map(|v| v / study.datasets as f64).collect(),
                })
                .collect();
            cells.push(VariantCell {
                weighting: variant.weighting,
                metric: variant.metric.clone(),
                epsilon,
                max_edf,
                stuck,
                mean_max_edf,
                acf,
            });
        }
    }

    let acceptance: Vec<f64> = reductions.iter().map(|r| r.baseline_acceptance).collect();
    let mean_acceptance = acceptance.iter().sum::<f64>() / study.datasets as f64;
    let mut baseline_acf_sum = vec![vec![0.0f64; lags]; TRACKED.len()];
    for reduction in &reductions {
        for (sum, curve) in baseline_acf_sum.iter_mut().zip(&reduction.baseline_acf) {
            for (s, v) in sum.iter_mut().zip(curve) {
                *s += v;
            }
        }
    }
    let baseline_acf = TRACKED
        .iter()
        .zip(baseline_acf_sum)
        .map(|((_, label), sum)| AcfCurve {
            component: (*label).to_string(),
            values: sum.into_iter().map(|v| v / study.datasets as f64).collect(),
        })
        .collect();

    Ok(ToleranceStudyOutput {
        cells,
        baseline: BaselineReport {
            epsilon: study.baseline_epsilon,
            acceptance,
            mean_acceptance,
            acf: baseline_acf,
            tuning: baseline_tuning,
        },
        scales,
        config_fingerprint: short_fingerprint(study)?,
    })
}

/// Dataset `d`'s observation: symbols from the prior, channels from the CSI
/// prior, then one forward simulation — all on the dataset's draw stream.
fn dataset_observation(
    config: &SystemConfig,
    master: RngStream,
    d: usize,
) -> Result<Observation> {
    let stream = master.derive(STUDY_TAG_DATASET_BASE + d as u64).derive(DATASET_TAG_DRAW);
    let mut rng = stream.rng();
    let truth = config.prior.sample(&mut rng);
    let channels = draw_channels(&config.csi, &mut rng);
    let symbols = truth.symbols(&config.constellation);
    Ok(simulate_forward_with(config, &symbols, &channels, &mut rng)?.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn micro_study() -> ToleranceStudyConfig {
        let base = SystemConfig::default_setup(2).unwrap();
        ToleranceStudyConfig {
            datasets: 2,
            epsilon_grid: vec![0.5, 1.0],
            baseline_epsilon: 0.4,
            baseline_iterations: 3_000,
            baseline_burn_in: 600,
            grid_iterations: 1_500,
            grid_burn_in: 400,
            variants: vec![
                AbcVariant { weighting: WeightKind::Soft, metric: MetricSpec::Mahalanobis },
                AbcVariant { weighting: WeightKind::Hard, metric: MetricSpec::ScaledEuclidean },
            ],
            n_synthetic: 1,
            tune: TuneOptions {
                pilot_iterations: 400,
                max_pilots: 3,
                ..default_study_tune()
            },
            max_lag: 20,
            master_seed: 33,
            ..ToleranceStudyConfig::standard(base, 33).unwrap()
        }
    }

    #[test]
    fn the_micro_study_has_full_shape_and_is_deterministic() {
        let study = micro_study();
        let first = run_tolerance_study(&study).unwrap();
        assert_eq!(first.cells.len(), 4);
        for cell in &first.cells {
            assert_eq!(cell.max_edf.len(), 2);
            assert_eq!(cell.stuck.len(), 2);
            assert_eq!(cell.acf.len(), 2);
            assert_eq!(cell.acf[0].values.len(), 21);
            assert!((cell.acf[0].values[0] - 1.0).abs() < 1e-9);
            assert!(cell.max_edf.iter().all(|&v| (0.0..=1.0).contains(&v)));
            let mean = cell.max_edf.iter().sum::<f64>() / 2.0;
            assert!((cell.mean_max_edf - mean).abs() < 1e-15);
        }
        // Cells are variant-major in config order.
        assert_eq!(first.cells[0].weighting, WeightKind::Soft);
        assert_eq!(first.cells[0].epsilon, 0.5);
        assert_eq!(first.cells[1].epsilon, 1.0);
        assert_eq!(first.cells[2].weighting, WeightKind::Hard);
        assert_eq!(first.scales.len(), 2);
        assert_eq!(first.baseline.acceptance.len(), 2);

        let second = run_tolerance_study(&study).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn thread_count_does_not_change_the_study() {
        let study = micro_study();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_tolerance_study(&study))
            .unwrap();
        let pooled = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_tolerance_study(&study))
            .unwrap();
        assert_eq!(single, pooled);
    }

    #[test]
    fn study_configs_are_validated() {
        let mut study = micro_study();
        study.datasets = 0;
        assert!(study.validate().is_err());

        let mut study = micro_study();
        study.epsilon_grid = vec![];
        assert!(study.validate().is_err());

        let mut study = micro_study();
        study.epsilon_grid = vec![-0.5];
        assert!(study.validate().is_err());

        // Burn-in shorter than the tolerance anneal is rejected.
        let mut study = micro_study();
        study.baseline_burn_in = 100;
        assert!(study.validate().is_err());

        // Max lag must fit in the shortest post-burn-in tail.
        let mut study = micro_study();
        study.max_lag = 1_200;
        assert!(study.validate().is_err());

        let mut study = micro_study();
        study.variants.push(study.variants[0].clone());
        assert!(study.validate().is_err());
    }

    #[test]
    fn the_default_protocol_matches_the_published_settings() {
        let base = SystemConfig::default_setup(5).unwrap();
        let study = ToleranceStudyConfig::standard(base, 1).unwrap();
        assert_eq!(study.datasets, 20);
        assert_eq!(study.epsilon_grid, vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(study.baseline_epsilon, 0.2);
        assert_eq!(study.baseline_iterations, 100_000);
        assert_eq!(study.grid_iterations, 20_000);
        assert_eq!(study.variants.len(), 4);
        assert_eq!(study.tune.target_low, 0.1);
        assert_eq!(study.tune.target_high, 0.3);
    }
}
