//! Likelihood-free single-component Metropolis chain.
//!
//! The target is the joint posterior of the codeword and both channel vectors,
//! approximated by weighting states with a kernel of the distance between the
//! observed frame's summary and summaries of frames simulated at the proposed
//! state. The tolerance follows [`ToleranceSchedule`]: wide open at the start
//! so the chain can move freely, annealing linearly down to the configured
//! floor within the burn-in period.
//!
//! Per-iteration randomness is consumed in a fixed order — coordinate choice,
//! proposal value, optional re-simulation of the current state, synthetic
//! frames for the proposal, accept decision — so a run is a pure function of
//! the input stream.

use num_complex::Complex64;
use rand::Rng;

use crate::abc::{ResolvedAbcSpec, Summarizer, ToleranceSchedule, WeightKind};
use crate::model::{simulate_forward_flat, Observation, SystemConfig};
use crate::numerics::{cn_log_density, draw_cn};
use crate::rng::RngStream;
use crate::samplers::{
    component_list, metropolis_accept, ChainTrace, Component, SamplerSettings, ScanMode,
    TraceBuilder,
};
use crate::{Error, Result};

/// Log of the kernel weight averaged over synthetic replicates.
///
/// Hard kernel: `ln(#{rho_d <= eps} / D)`, negative infinity when no replicate
/// lands inside the tolerance. Soft kernel: `ln(mean_d exp(-rho_d / eps^2))`,
/// evaluated stably in log space.
fn log_kernel_weight(kind: WeightKind, rhos: &[f64], epsilon: f64) -> f64 {
    let d = rhos.len() as f64;
    match kind {
        WeightKind::Hard => {
            let inside = rhos.iter().filter(|&&r| r <= epsilon).count();
            if inside == 0 {
                f64::NEG_INFINITY
            } else {
                (inside as f64 / d).ln()
            }
        }
        WeightKind::Soft => {
            let e2 = epsilon * epsilon;
            if rhos.len() == 1 {
                return -rhos[0] / e2;
            }
            // The smallest distance carries the largest exponent; factor it
            // out so the sum never underflows to zero.
            let min = rhos.iter().fold(f64::INFINITY, |m, &r| m.min(r));
            let sum: f64 = rhos.iter().map(|&r| (-(r - min) / e2).exp()).sum();
            -min / e2 + (sum / d).ln()
        }
    }
}

/// Run the likelihood-free chain on one observed frame.
///
/// The initial state draws the codeword from its prior and sets both channel
/// vectors to their CSI estimates. Each iteration updates one coordinate:
/// symbols are proposed uniformly over the constellation, channel coefficients
/// by a complex Gaussian random walk. With `settings.clamp_channels` the
/// channels stay at the estimates and only symbols are sampled.
pub fn run_mcmc_abc(
    config: &SystemConfig,
    observation: &Observation,
    abc: &ResolvedAbcSpec,
    settings: &SamplerSettings,
    stream: RngStream,
) -> Result<ChainTrace> {
    config.validate()?;
    settings.validate()?;
    let l = config.relays();
    let k = config.symbols_per_frame();
    let m = config.constellation.order();
    if observation.relays() != l || observation.symbols_per_frame() != k {
        return Err(Error::invalid(format!(
            "observation is {}x{} but the config expects {}x{}",
            observation.relays(),
            observation.symbols_per_frame(),
            l,
            k
        )));
    }
    if abc.n_synthetic == 0 {
        return Err(Error::invalid("n_synthetic must be at least 1"));
    }
    let scales = settings.resolved_scales(config)?;
    let schedule = ToleranceSchedule::new(settings.n_iterations, abc.epsilon_min)?;
    let mut summarizer = Summarizer::new(abc.summary.clone(), l, k)?;
    let dim = summarizer.dim();
    if let Some(metric_dim) = abc.metric.fixed_dim() {
        if metric_dim != dim {
            return Err(Error::invalid(format!(
                "distance metric was resolved for dimension {metric_dim} but the summary has \
                 dimension {dim}; resolve the spec against this system"
            )));
        }
    }

    let mut observed = vec![0.0; dim];
    summarizer.summarize_into(&observation.to_flat(), &mut observed);

    let mut rng = stream.rng();
    let mut cur_idx = config.prior.sample(&mut rng).0;
    let mut cur_vals: Vec<f64> =
        cur_idx.iter().map(|&i| config.constellation.point(i)).collect();
    let mut cur_rank = rank_of(&cur_idx, m);
    let mut g = config.csi.g_hat.clone();
    let mut h = config.csi.h_hat.clone();

    let d_syn = abc.n_synthetic;
    let mut frame_buf = vec![Complex64::new(0.0, 0.0); l * k];
    let mut summary_buf = vec![0.0; dim];
    let mut cur_rho = vec![0.0; d_syn];
    let mut prop_rho = vec![0.0; d_syn];
    for slot in cur_rho.iter_mut() {
        simulate_forward_flat(config, &cur_vals, &h, &g, &mut frame_buf, &mut rng)?;
        summarizer.summarize_into(&frame_buf, &mut summary_buf);
        *slot = abc.metric.distance_unchecked(&summary_buf, &observed);
    }

    let components = component_list(l, k, settings.clamp_channels, false, false);
    let mut builder = TraceBuilder::new(l, k, settings.n_iterations, false);

    for n in 1..=settings.n_iterations {
        let epsilon = schedule.tolerance_at(n);
        let component = match settings.scan {
            ScanMode::Random => components[rng.random_range(0..components.len())],
            ScanMode::Systematic => components[(n - 1) % components.len()],
        };

        // Draw the proposal for the chosen coordinate and its log prior ratio,
        // but do not apply it to the state yet.
        enum Pending {
            Symbol { slot: usize, idx: usize },
            Channel { is_g: bool, slot: usize, value: Complex64 },
        }
        let (pending, ln_prior_delta) = match component {
            Component::Symbol(ki) => {
                let idx = rng.random_range(0..m);
                let prop_rank =
                    shifted_rank(cur_rank, cur_idx[ki], idx, place_value(m, k, ki));
                let delta = config.prior.ln_prob_rank(prop_rank)
                    - config.prior.ln_prob_rank(cur_rank);
                (Pending::Symbol { slot: ki, idx }, delta)
            }
            Component::G(li) => {
                let value = draw_cn(g[li], scales.sigma_g_sq, &mut rng);
                let delta = cn_log_density(value, config.csi.g_hat[li], config.csi.sigma_g_sq)
                    - cn_log_density(g[li], config.csi.g_hat[li], config.csi.sigma_g_sq);
                (Pending::Channel { is_g: true, slot: li, value }, delta)
            }
            Component::H(li) => {
                let value = draw_cn(h[li], scales.sigma_h_sq, &mut rng);
                let delta = cn_log_density(value, config.csi.h_hat[li], config.csi.sigma_h_sq)
                    - cn_log_density(h[li], config.csi.h_hat[li], config.csi.sigma_h_sq);
                (Pending::Channel { is_g: false, slot: li, value }, delta)
            }
            Component::W { .. } => unreachable!("likelihood-free chain has no noise coordinates"),
        };

        // Optionally refresh the current state's stored distances with fresh
        // synthetic frames before comparing against the proposal.
        if abc.refresh_current_distance {
            for slot in cur_rho.iter_mut() {
                simulate_forward_flat(config, &cur_vals, &h, &g, &mut frame_buf, &mut rng)?;
                summarizer.summarize_into(&frame_buf, &mut summary_buf);
                *slot = abc.metric.distance_unchecked(&summary_buf, &observed);
            }
        }

        // Apply the proposal, remembering how to undo it.
        let undo = match pending {
            Pending::Symbol { slot, idx } => {
                let old = cur_idx[slot];
                cur_idx[slot] = idx;
                cur_vals[slot] = config.constellation.point(idx);
                Pending::Symbol { slot, idx: old }
            }
            Pending::Channel { is_g, slot, value } => {
                let store = if is_g { &mut g } else { &mut h };
                let old = store[slot];
                store[slot] = value;
                Pending::Channel { is_g, slot, value: old }
            }
        };

        for slot in prop_rho.iter_mut() {
            simulate_forward_flat(config, &cur_vals, &h, &g, &mut frame_buf, &mut rng)?;
            summarizer.summarize_into(&frame_buf, &mut summary_buf);
            *slot = abc.metric.distance_unchecked(&summary_buf, &observed);
        }

        let log_weight_prop = log_kernel_weight(abc.weighting, &prop_rho, epsilon);
        let log_weight_cur = log_kernel_weight(abc.weighting, &cur_rho, epsilon);
        let accepted =
            metropolis_accept(&mut rng, ln_prior_delta + log_weight_prop, log_weight_cur);

        if accepted {
            if let Pending::Symbol { slot, idx: old } = undo {
                cur_rank = shifted_rank(cur_rank, old, cur_idx[slot], place_value(m, k, slot));
            }
            std::mem::swap(&mut cur_rho, &mut prop_rho);
        } else {
            match undo {
                Pending::Symbol { slot, idx } => {
                    cur_idx[slot] = idx;
                    cur_vals[slot] = config.constellation.point(idx);
                }
                Pending::Channel { is_g, slot, value } => {
                    let store = if is_g { &mut g } else { &mut h };
                    store[slot] = value;
                }
            }
        }

        let mean_rho = cur_rho.iter().sum::<f64>() / d_syn as f64;
        builder.record(
            &cur_idx,
            &g,
            &h,
            None,
            Some(mean_rho),
            None,
            Some(epsilon),
            accepted,
            component.canonical_index(l, k),
        );
    }

    Ok(builder.finish(settings.burn_in))
}

/// `m^(k - 1 - slot)`: the weight of symbol `slot` in the codeword rank.
fn place_value(m: usize, k: usize, slot: usize) -> usize {
    m.pow((k - 1 - slot) as u32)
}

/// Lexicographic rank of a codeword given as indices.
fn rank_of(indices: &[usize], m: usize) -> usize {
    indices.iter().fold(0, |acc, &i| acc * m + i)
}

/// Rank after replacing one symbol, given that symbol's place value.
fn shifted_rank(rank: usize, old: usize, new: usize, place: usize) -> usize {
    (rank as i64 + (new as i64 - old as i64) * place as i64) as usize
}
