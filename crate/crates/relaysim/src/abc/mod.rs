//! Likelihood-free (simulation-based) acceptance machinery.
//!
//! Exact likelihood evaluation is intractable for nonlinear relays, so
//! samplers compare the observed frame against synthetic frames simulated at
//! proposed parameters: frames are compressed by a summary statistic
//! ([`SummarySpec`]), compared by a distance ([`DistanceMetric`]), and the
//! distance is turned into an acceptance weight ([`WeightingFunction`]) under
//! a tolerance that anneals over burn-in ([`ToleranceSchedule`]).

mod covariance;
mod distance;
mod summary;
mod weight;

pub use covariance::{
    covariance_cache_key, estimate_summary_covariance, load_covariance_cache,
    save_covariance_cache, DEFAULT_COVARIANCE_DRAWS,
};
pub use distance::{DistanceMetric, MahalanobisForm, MetricSpec};
pub use summary::{summarize, ComplexHandling, SummaryKind, SummarySpec, Summarizer};
pub use weight::{weight_with, ToleranceSchedule, WeightKind, WeightingFunction};

use serde::{Deserialize, Serialize};

use crate::model::SystemConfig;
use crate::rng::RngStream;
use crate::Result;

/// Complete, serializable description of the simulation-based acceptance
/// rule used by the likelihood-free sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcSpec {
    /// Summary statistic.
    #[serde(default)]
    pub summary: SummarySpec,
    /// Distance between summaries; covariance-aware metrics are resolved
    /// against an estimated summary covariance when the spec is resolved.
    #[serde(default = "default_metric")]
    pub metric: MetricSpec,
    /// Kernel shape.
    #[serde(default = "default_weighting")]
    pub weighting: WeightKind,
    /// Tolerance floor the burn-in anneal descends to.
    #[serde(default = "default_epsilon_min")]
    pub epsilon_min: f64,
    /// Synthetic frames simulated per proposal; weights average over them.
    #[serde(default = "default_n_synthetic")]
    pub n_synthetic: usize,
    /// Re-simulate the current state's distance every iteration instead of
    /// carrying the stored value forward.
    #[serde(default)]
    pub refresh_current_distance: bool,
    /// Forward draws used to estimate the summary covariance.
    #[serde(default = "default_covariance_draws")]
    pub covariance_draws: usize,
}

fn default_metric() -> MetricSpec {
    MetricSpec::Mahalanobis
}

fn default_weighting() -> WeightKind {
    WeightKind::Soft
}

fn default_epsilon_min() -> f64 {
    0.25
}

fn default_n_synthetic() -> usize {
    1
}

fn default_covariance_draws() -> usize {
    DEFAULT_COVARIANCE_DRAWS
}

impl Default for AbcSpec {
    fn default() -> Self {
        AbcSpec {
            summary: SummarySpec::default(),
            metric: default_metric(),
            weighting: default_weighting(),
            epsilon_min: default_epsilon_min(),
            n_synthetic: default_n_synthetic(),
            refresh_current_distance: false,
            covariance_draws: default_covariance_draws(),
        }
    }
}

impl AbcSpec {
    /// Soft/Mahalanobis spec at a given tolerance floor, the default detector
    /// configuration.
    pub fn soft_mahalanobis(epsilon_min: f64) -> Self {
        AbcSpec { epsilon_min, ..AbcSpec::default() }
    }

    /// Hard/identity-summary spec, useful for exact-match style checks.
    pub fn hard_identity(epsilon_min: f64) -> Self {
        AbcSpec {
            summary: SummarySpec::identity(),
            metric: MetricSpec::Euclidean,
            weighting: WeightKind::Hard,
            epsilon_min,
            ..AbcSpec::default()
        }
    }

    /// Validate the spec's scalar fields.
    pub fn validate(&self) -> Result<()> {
        self.summary.validate()?;
        if !self.epsilon_min.is_finite() || self.epsilon_min <= 0.0 {
            return Err(crate::Error::invalid(format!(
                "epsilon_min must be finite and > 0, got {}",
                self.epsilon_min
            )));
        }
        if self.n_synthetic == 0 {
            return Err(crate::Error::invalid("n_synthetic must be at least 1"));
        }
        if let MetricSpec::Lp { p } = self.metric {
            DistanceMetric::lp(p)?;
        }
        Ok(())
    }

    /// Resolve the metric against this config, estimating the summary
    /// covariance on `stream` when the metric needs one.
    pub fn resolve(&self, config: &SystemConfig, stream: RngStream) -> Result<ResolvedAbcSpec> {
        self.validate()?;
        let metric = match &self.metric {
            MetricSpec::Euclidean => DistanceMetric::Euclidean,
            MetricSpec::CityBlock => DistanceMetric::CityBlock,
            MetricSpec::Lp { p } => DistanceMetric::lp(*p)?,
            MetricSpec::ScaledEuclidean => {
                let cov = estimate_summary_covariance(
                    config,
                    &self.summary,
                    self.covariance_draws,
                    stream,
                )?;
                DistanceMetric::scaled_euclidean_from_cov(&cov)?
            }
            MetricSpec::Mahalanobis => {
                let cov = estimate_summary_covariance(
                    config,
                    &self.summary,
                    self.covariance_draws,
                    stream,
                )?;
                DistanceMetric::mahalanobis(cov)?
            }
        };
        Ok(ResolvedAbcSpec {
            summary: self.summary.clone(),
            metric,
            weighting: self.weighting,
            epsilon_min: self.epsilon_min,
            n_synthetic: self.n_synthetic,
            refresh_current_distance: self.refresh_current_distance,
        })
    }
}

/// An [`AbcSpec`] with its metric resolved to a concrete evaluator.
#[derive(Debug, Clone)]
pub struct ResolvedAbcSpec {
    /// Summary statistic.
    pub summary: SummarySpec,
    /// Concrete distance evaluator.
    pub metric: DistanceMetric,
    /// Kernel shape.
    pub weighting: WeightKind,
    /// Tolerance floor.
    pub epsilon_min: f64,
    /// Synthetic frames per proposal.
    pub n_synthetic: usize,
    /// Re-simulate the current state's distance every iteration.
    pub refresh_current_distance: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_resolves_to_mahalanobis() {
        let config = SystemConfig::default_setup(5).unwrap();
        let spec = AbcSpec::default();
        assert!(spec.metric.needs_covariance());
        let resolved = spec.resolve(&config, RngStream::new(1)).unwrap();
        assert!(matches!(resolved.metric, DistanceMetric::Mahalanobis(_)));
        assert_eq!(resolved.metric.fixed_dim(), Some(18));
    }

    #[test]
    fn plain_metrics_resolve_without_covariance() {
        let config = SystemConfig::default_setup(2).unwrap();
        let spec = AbcSpec {
            metric: MetricSpec::Lp { p: 1.5 },
            ..AbcSpec::hard_identity(0.5)
        };
        let resolved = spec.resolve(&config, RngStream::new(1)).unwrap();
        assert!(matches!(resolved.metric, DistanceMetric::Lp { .. }));
    }

    #[test]
    fn spec_serde_defaults_fill_in() {
        let spec: AbcSpec = serde_json::from_str("{}").unwrap();
        assert_eq!(spec, AbcSpec::default());
        let spec: AbcSpec =
            serde_json::from_str(r#"{"weighting":"hard","epsilon_min":0.5}"#).unwrap();
        assert_eq!(spec.weighting, WeightKind::Hard);
        assert_eq!(spec.epsilon_min, 0.5);
        assert_eq!(spec.n_synthetic, 1);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut spec = AbcSpec::default();
        spec.epsilon_min = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = AbcSpec::default();
        spec.n_synthetic = 0;
        assert!(spec.validate().is_err());
        let mut spec = AbcSpec::default();
        spec.metric = MetricSpec::Lp { p: 0.3 };
        assert!(spec.validate().is_err());
    }
}
