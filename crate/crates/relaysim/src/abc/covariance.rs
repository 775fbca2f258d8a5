//! Summary covariance estimation for covariance-aware metrics.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::abc::summary::{SummarySpec, Summarizer};
use crate::error::Error;
use crate::fingerprint::fingerprint;
use crate::model::{ChannelRealization, SystemConfig};
use crate::model::simulate_forward_flat;
use crate::numerics::sample_covariance;
use crate::rng::RngStream;
use crate::Result;

/// Relative ridge added to the diagonal after estimation.
const RIDGE_FACTOR: f64 = 1e-8;

/// Default number of forward draws for the estimate.
pub const DEFAULT_COVARIANCE_DRAWS: usize = 2_000;

/// Estimate the covariance of the summary statistic under the model.
///
/// Draws `n_draws` synthetic frames at a fixed, deterministic anchor point:
/// the prior's modal codeword (lexicographically smallest on ties) with the
/// channels clamped to the CSI estimates. Returns the unbiased sample
/// covariance with a relative ridge `1e-8 * trace / dim` added to the
/// diagonal, verified positive definite.
pub fn estimate_summary_covariance(
    config: &SystemConfig,
    summary: &SummarySpec,
    n_draws: usize,
    stream: RngStream,
) -> Result<DMatrix<f64>> {
    let (l, k) = (config.relays(), config.symbols_per_frame());
    let mut summarizer = Summarizer::new(summary.clone(), l, k)?;
    let dim = summarizer.dim();
    if n_draws < dim + 1 {
        return Err(Error::InsufficientData(format!(
            "covariance estimation needs more draws ({n_draws}) than the summary dimension ({dim})"
        )));
    }
    let s_anchor = config.prior.mode();
    let symbols = s_anchor.symbols(&config.constellation);
    let channels = ChannelRealization::from_estimates(&config.csi);

    let mut rng = stream.rng();
    let mut frame = vec![num_complex::Complex64::new(0.0, 0.0); l * k];
    let mut rows = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        simulate_forward_flat(config, &symbols, &channels.h, &channels.g, &mut frame, &mut rng)?;
        let mut row = vec![0.0; dim];
        summarizer.summarize_into(&frame, &mut row);
        rows.push(row);
    }
    let mut cov = sample_covariance(&rows)?;
    let ridge = RIDGE_FACTOR * cov.trace() / dim as f64;
    for i in 0..dim {
        cov[(i, i)] += ridge;
    }
    if nalgebra::Cholesky::new(cov.clone()).is_none() {
        return Err(Error::NumericDomain(
            "summary covariance is singular after ridge regularization; \
             the summaries carry no variation under this config"
                .into(),
        ));
    }
    Ok(cov)
}

/// On-disk form of a cached covariance estimate.
#[derive(Serialize, Deserialize)]
struct CovarianceCacheDoc {
    key: String,
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
}

/// Cache key for a covariance estimate: config, summary and draw settings.
pub fn covariance_cache_key(
    config: &SystemConfig,
    summary: &SummarySpec,
    n_draws: usize,
    stream: RngStream,
) -> Result<String> {
    fingerprint(&(config, summary, n_draws, stream.seed, stream.stream))
}

/// Save an estimate for reuse, keyed so stale caches are never accepted.
pub fn save_covariance_cache(path: &Path, key: &str, cov: &DMatrix<f64>) -> Result<()> {
    let doc = CovarianceCacheDoc {
        key: key.to_string(),
        dim: cov.nrows(),
        entries: cov.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect(),
    };
    std::fs::write(path, serde_json::to_vec_pretty(&doc)?)?;
    Ok(())
}

/// Load a cached estimate if the file exists and its key matches.
pub fn load_covariance_cache(path: &Path, key: &str) -> Result<Option<DMatrix<f64>>> {
    if !path.exists() {
        return Ok(None);
    }
    let doc: CovarianceCacheDoc = serde_json::from_slice(&std::fs::read(path)?)?;
    if doc.key != key {
        return Ok(None);
    }
    if doc.entries.len() != doc.dim * doc.dim {
        return Err(Error::Config(format!(
            "covariance cache at {} is malformed: {} entries for dim {}",
            path.display(),
            doc.entries.len(),
            doc.dim
        )));
    }
    Ok(Some(DMatrix::from_row_slice(doc.dim, doc.dim, &doc.entries)))
}
