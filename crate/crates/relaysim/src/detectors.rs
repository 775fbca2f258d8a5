//! Symbol decisions from chains and closed-form scores.
//!
//! Four detectors share the [`Detection`] output type:
//!
//! - [`map_from_trace`] reads the post-burn-in empirical mode of the codeword
//!   marginal off a sampler trace.
//! - [`ses_zf_detect`] zero-forces the relay noise (`w = 0`), plugs in the CSI
//!   estimates, and searches all `M^K` codewords exhaustively.
//! - [`omap_detect`] is the oracle bound: it conditions on the true channels
//!   and the true relay noise, which no real receiver can do.
//! - [`exact_posterior_known_channels`] returns the full normalized posterior
//!   for the linear relay with known channels, where the relay noise
//!   integrates out in closed form; it exists to ground-truth the samplers.
//!
//! All scoring is done in the log domain, and every exhaustive search walks
//! ranks in ascending order so ties resolve to the lexicographically smallest
//! codeword, deterministically.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{
    linear_log_likelihood, ChannelCsi, ChannelRealization, Codeword, Observation, SystemConfig,
};
use crate::numerics::cn_log_density;
use crate::samplers::ChainTrace;
use crate::{Error, Result};

/// Largest codeword space an exhaustive detector will enumerate.
pub const SEARCH_BUDGET: usize = 10_000_000;

/// Which detector produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMethod {
    /// Likelihood-free chain, post-burn-in codeword mode.
    McmcAbc,
    /// Auxiliary-variable chain, post-burn-in codeword mode.
    McmcAv,
    /// Zero-forced relay noise with CSI estimates, exhaustive search.
    SesZf,
    /// Oracle search conditioning on true channels and noise.
    Omap,
    /// Closed-form posterior for the linear relay with known channels.
    ExactKnownChannel,
}

impl std::fmt::Display for DetectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Matches the serialized (kebab-case) names, so CSV columns and JSON
        // configs spell detectors identically.
        let name = match self {
            DetectionMethod::McmcAbc => "mcmc-abc",
            DetectionMethod::McmcAv => "mcmc-av",
            DetectionMethod::SesZf => "ses-zf",
            DetectionMethod::Omap => "omap",
            DetectionMethod::ExactKnownChannel => "exact-known-channel",
        };
        f.write_str(name)
    }
}

/// A symbol decision with its score and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// The decided codeword.
    pub s_hat: Codeword,
    /// Log posterior mass (chain and exact detectors) or log MAP objective
    /// (exhaustive detectors).
    pub score: f64,
    /// Which detector produced this decision.
    pub method: DetectionMethod,
}

/// Reject codeword spaces too large to enumerate, returning `M^K` otherwise.
pub(crate) fn check_search_budget(m: usize, k: usize) -> Result<usize> {
    let size = m
        .checked_pow(u32::try_from(k).map_err(|_| Error::invalid("K is absurdly large"))?)
        .ok_or_else(|| {
            Error::SearchSpaceTooLarge(format!("M^K overflows usize (budget {SEARCH_BUDGET})"))
        })?;
    if size > SEARCH_BUDGET {
        return Err(Error::SearchSpaceTooLarge(format!(
            "M^K = {size} codewords exceeds the budget of {SEARCH_BUDGET}"
        )));
    }
    Ok(size)
}

/// Most frequent codeword among trace states after `burn_in`, ties broken
/// lexicographically. The score is the log empirical frequency of the winner.
///
/// The decision depends only on the multiset of post-burn-in codewords, not
/// on their order. The method is read off the trace: chains that carry exact
/// log-likelihoods report as auxiliary-variable, others as likelihood-free.
pub fn map_from_trace(trace: &ChainTrace, burn_in: usize) -> Result<Detection> {
    let n = trace.n_iterations();
    if burn_in >= n {
        return Err(Error::InsufficientData(format!(
            "burn-in of {burn_in} leaves no iterations in a trace of length {n}"
        )));
    }
    let mut counts = std::collections::BTreeMap::<&[usize], usize>::new();
    let mut total = 0usize;
    for i in burn_in..n {
        *counts.entry(trace.symbols_at(i)).or_insert(0) += 1;
        total += 1;
    }
    // BTreeMap iterates codewords in lexicographic order; keeping only
    // strictly larger counts makes the smallest tied codeword win.
    let mut best: Option<(&[usize], usize)> = None;
    for (codeword, &count) in &counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((codeword, count));
        }
    }
    let (codeword, count) = best.expect("at least one post-burn-in state");
    let method = if trace.log_likelihood().is_some() {
        DetectionMethod::McmcAv
    } else {
        DetectionMethod::McmcAbc
    };
    Ok(Detection {
        s_hat: Codeword(codeword.to_vec()),
        score: (count as f64 / total as f64).ln(),
        method,
    })
}

/// Exhaustive maximum-posterior search with fixed channels and relay noise.
///
/// The log objective separates over symbol slots given the channels, so the
/// per-slot, per-symbol Gaussian terms are tabulated once (`K*M*L` relay
/// evaluations) and each codeword costs `K` table lookups plus its log prior.
fn exhaustive_map(
    config: &SystemConfig,
    y: &Observation,
    channels: &ChannelRealization,
    w: &[Vec<Complex64>],
    ln_prior: impl Fn(usize) -> f64,
    method: DetectionMethod,
) -> Result<Detection> {
    config.validate()?;
    let l = config.relays();
    let k = config.symbols_per_frame();
    let m = config.constellation.order();
    if y.relays() != l || y.symbols_per_frame() != k {
        return Err(Error::invalid("observation shape does not match the config"));
    }
    if channels.h.len() != l || channels.g.len() != l {
        return Err(Error::invalid("channel realization must have one entry per relay"));
    }
    if w.len() != l || w.iter().any(|row| row.len() != k) {
        return Err(Error::invalid("relay noise must be an L x K array"));
    }
    let support = check_search_budget(m, k)?;
    let sigma_v_sq = config.noise.sigma_v_sq;

    // table[ki * m + mi]: log-likelihood contribution of slot ki carrying
    // constellation point mi, summed over relays.
    let mut table = vec![0.0f64; k * m];
    for ki in 0..k {
        for mi in 0..m {
            let value = config.constellation.point(mi);
            let mut acc = 0.0;
            for li in 0..l {
                let mean =
                    config.relay.apply(channels.h[li] * value + w[li][ki])? * channels.g[li];
                acc += cn_log_density(y.rows[li][ki], mean, sigma_v_sq);
            }
            table[ki * m + mi] = acc;
        }
    }

    let mut best_rank = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for rank in 0..support {
        let mut score = ln_prior(rank);
        let mut rest = rank;
        for ki in (0..k).rev() {
            score += table[ki * m + rest % m];
            rest /= m;
        }
        if score > best_score {
            best_score = score;
            best_rank = rank;
        }
    }
    Ok(Detection {
        s_hat: Codeword::from_rank(best_rank, m, k),
        score: best_score,
        method,
    })
}

/// Suboptimal practical detector: condition the relay noise on its mean
/// (`w = 0`), plug in the CSI estimates for both channels, and take the exact
/// argmax of prior times `CN(f(s * h_hat) * g_hat, sigma_v_sq I)` over all
/// `M^K` codewords.
pub fn ses_zf_detect(config: &SystemConfig, y: &Observation, csi: &ChannelCsi) -> Result<Detection> {
    csi.validate()?;
    let zero_noise =
        vec![vec![Complex64::new(0.0, 0.0); config.symbols_per_frame()]; csi.relays()];
    exhaustive_map(
        config,
        y,
        &ChannelRealization::from_estimates(csi),
        &zero_noise,
        |r| config.prior.ln_prob_rank(r),
        DetectionMethod::SesZf,
    )
}

/// Oracle maximum-posterior detector: conditions on the true channels and the
/// true relay noise, quantities only a simulation can hand over. Its error
/// rate lower-bounds every implementable detector.
pub fn omap_detect(
    config: &SystemConfig,
    y: &Observation,
    channels: &ChannelRealization,
    w: &[Vec<Complex64>],
) -> Result<Detection> {
    exhaustive_map(
        config,
        y,
        channels,
        w,
        |r| config.prior.ln_prob_rank(r),
        DetectionMethod::Omap,
    )
}

/// Normalized posterior over all codewords for the linear relay with known
/// channels, where the relay noise folds into the observation noise:
/// entry `(l, k)` is Gaussian around `s[k] * h[l] * g[l]` with variance
/// `|g[l]|^2 * sigma_w_sq + sigma_v_sq`.
///
/// Returned in rank order; sums to 1 to within numerical rounding.
pub fn exact_posterior_known_channels(
    config: &SystemConfig,
    y: &Observation,
    channels: &ChannelRealization,
) -> Result<Vec<f64>> {
    config.validate()?;
    if !config.relay.is_linear() {
        return Err(Error::invalid(
            "the closed-form posterior requires the linear relay",
        ));
    }
    let m = config.constellation.order();
    let k = config.symbols_per_frame();
    let support = check_search_budget(m, k)?;
    let mut log_post = Vec::with_capacity(support);
    for rank in 0..support {
        let cw = Codeword::from_rank(rank, m, k);
        let ll = linear_log_likelihood(config, y, &cw, channels)?;
        log_post.push(config.prior.ln_prob_rank(rank) + ll);
    }
    let max = log_post.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !max.is_finite() {
        return Err(Error::NumericDomain(
            "posterior has no finite-scored codeword".into(),
        ));
    }
    let unnormalized: Vec<f64> = log_post.iter().map(|&lp| (lp - max).exp()).collect();
    let total: f64 = unnormalized.iter().sum();
    Ok(unnormalized.into_iter().map(|p| p / total).collect())
}

/// Argmax of [`exact_posterior_known_channels`] as a [`Detection`]; the score
/// is the log posterior mass of the winner.
pub fn exact_map_known_channels(
    config: &SystemConfig,
    y: &Observation,
    channels: &ChannelRealization,
) -> Result<Detection> {
    let pmf = exact_posterior_known_channels(config, y, channels)?;
    let mut best = 0usize;
    for (rank, &p) in pmf.iter().enumerate() {
        if p > pmf[best] {
            best = rank;
        }
    }
    Ok(Detection {
        s_hat: Codeword::from_rank(best, config.constellation.order(), config.symbols_per_frame()),
        score: pmf[best].ln(),
        method: DetectionMethod::ExactKnownChannel,
    })
}
