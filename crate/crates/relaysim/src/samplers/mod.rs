//! Markov chain Monte Carlo samplers over the joint space of codeword and
//! channel unknowns.
//!
//! Two chains share one state layout and trace format:
//!
//! - [`run_mcmc_abc`] never evaluates a likelihood; proposals are scored by
//!   simulating synthetic frames and comparing summaries to the observed frame
//!   under a tolerance that anneals over burn-in.
//! - [`run_mcmc_av`] augments the state with the per-relay noise `w`, which
//!   makes the exact likelihood tractable, and runs plain Metropolis-Hastings.
//!
//! Both are single-component samplers: each iteration picks one coordinate
//! (a symbol, one channel coefficient, or one relay-noise entry), proposes a
//! new value from a symmetric kernel, and accepts or rejects. The coordinate
//! is drawn uniformly at random per iteration by default; a systematic cycle
//! is available through [`ScanMode`].
//!
//! [`tune_proposals`] searches for random-walk scales that land the acceptance
//! rate in a target band by running short pilot chains.

mod abc_chain;
mod av_chain;
mod tuning;

pub use abc_chain::run_mcmc_abc;
pub use av_chain::{av_log_likelihood, run_mcmc_av};
pub use tuning::{tune_proposals, SamplerKind, TuneOptions, TuneOutcome};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::SystemConfig;
use crate::{Error, Result};

/// Iterations inspected at the end of a run to flag a chain that has stopped
/// moving entirely.
pub const STUCK_WINDOW: usize = 5000;

/// How the per-iteration update coordinate is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Draw the coordinate uniformly at random each iteration.
    #[default]
    Random,
    /// Cycle through the coordinates in canonical order.
    Systematic,
}

/// One updatable coordinate of the chain state.
///
/// The canonical order is: the `K` symbols, then the `L` relay-to-destination
/// coefficients `g`, then the `L` source-to-relay coefficients `h`, then (for
/// the auxiliary-variable chain only) the `L*K` relay noise entries `w` in
/// row-major `(l, k)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Symbol slot `k` of the codeword.
    Symbol(usize),
    /// Relay-to-destination coefficient `g[l]`.
    G(usize),
    /// Source-to-relay coefficient `h[l]`.
    H(usize),
    /// Relay noise entry `w[l][k]`.
    W {
        /// Relay index.
        l: usize,
        /// Symbol slot.
        k: usize,
    },
}

impl Component {
    /// Position of this coordinate in the canonical order for a system with
    /// `l` relays and `k` symbols per frame.
    pub fn canonical_index(self, l: usize, k: usize) -> usize {
        match self {
            Component::Symbol(ki) => ki,
            Component::G(li) => k + li,
            Component::H(li) => k + l + li,
            Component::W { l: li, k: ki } => k + 2 * l + li * k + ki,
        }
    }

    /// Inverse of [`Component::canonical_index`].
    pub fn from_canonical(idx: usize, l: usize, k: usize) -> Component {
        if idx < k {
            Component::Symbol(idx)
        } else if idx < k + l {
            Component::G(idx - k)
        } else if idx < k + 2 * l {
            Component::H(idx - k - l)
        } else {
            let off = idx - k - 2 * l;
            Component::W { l: off / k, k: off % k }
        }
    }
}

/// Build the list of active coordinates for a chain.
pub(crate) fn component_list(
    l: usize,
    k: usize,
    clamp_channels: bool,
    include_relay_noise: bool,
    clamp_relay_noise: bool,
) -> Vec<Component> {
    let mut list = Vec::new();
    for ki in 0..k {
        list.push(Component::Symbol(ki));
    }
    if !clamp_channels {
        for li in 0..l {
            list.push(Component::G(li));
        }
        for li in 0..l {
            list.push(Component::H(li));
        }
    }
    if include_relay_noise && !clamp_relay_noise {
        for li in 0..l {
            for ki in 0..k {
                list.push(Component::W { l: li, k: ki });
            }
        }
    }
    list
}

/// Variances of the symmetric random-walk proposal kernels. Each proposal
/// draws from a complex Gaussian centred on the current value with the given
/// total variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalScales {
    /// Variance for `g` proposals.
    pub sigma_g_sq: f64,
    /// Variance for `h` proposals.
    pub sigma_h_sq: f64,
    /// Variance for `w` proposals (auxiliary-variable chain only).
    pub sigma_w_sq: f64,
}

impl ProposalScales {
    /// Scales matched to the model's own uncertainty: channel proposals at the
    /// estimation-error variances and `w` proposals at the relay noise
    /// variance. A sensible starting point for tuning.
    pub fn from_config(config: &SystemConfig) -> ProposalScales {
        ProposalScales {
            sigma_g_sq: config.csi.sigma_g_sq,
            sigma_h_sq: config.csi.sigma_h_sq,
            sigma_w_sq: config.noise.sigma_w_sq,
        }
    }

    /// All three variances multiplied by `factor`.
    pub fn scaled_by(&self, factor: f64) -> ProposalScales {
        ProposalScales {
            sigma_g_sq: self.sigma_g_sq * factor,
            sigma_h_sq: self.sigma_h_sq * factor,
            sigma_w_sq: self.sigma_w_sq * factor,
        }
    }

    /// Check all variances are finite and positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_g_sq", self.sigma_g_sq),
            ("sigma_h_sq", self.sigma_h_sq),
            ("sigma_w_sq", self.sigma_w_sq),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!(
                    "proposal scale {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Run-length, scan and proposal configuration shared by both samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    /// Total iterations `N`.
    pub n_iterations: usize,
    /// Iterations discarded before any estimate is read off the trace.
    pub burn_in: usize,
    /// Coordinate selection rule.
    #[serde(default)]
    pub scan: ScanMode,
    /// Hold both channel vectors at their CSI estimates instead of sampling
    /// them. Used when channels are treated as known.
    #[serde(default)]
    pub clamp_channels: bool,
    /// Auxiliary-variable chain only: hold the relay noise at zero instead of
    /// sampling it.
    #[serde(default)]
    pub clamp_relay_noise: bool,
    /// Random-walk variances; `None` falls back to
    /// [`ProposalScales::from_config`].
    #[serde(default)]
    pub scales: Option<ProposalScales>,
}

impl SamplerSettings {
    /// Settings with the given run length and defaults everywhere else.
    pub fn new(n_iterations: usize, burn_in: usize) -> Result<SamplerSettings> {
        let settings = SamplerSettings {
            n_iterations,
            burn_in,
            scan: ScanMode::Random,
            clamp_channels: false,
            clamp_relay_noise: false,
            scales: None,
        };
        settings.validate()?;
        Ok(settings)
    }

    /// The standard detection run: 20000 iterations with a 5000-iteration
    /// burn-in.
    pub fn standard() -> SamplerSettings {
        SamplerSettings::new(20_000, 5_000).expect("standard settings are valid")
    }

    /// These settings with explicit proposal scales.
    pub fn with_scales(mut self, scales: ProposalScales) -> SamplerSettings {
        self.scales = Some(scales);
        self
    }

    /// Check run lengths and scales.
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::invalid("n_iterations must be at least 1"));
        }
        if self.burn_in >= self.n_iterations {
            return Err(Error::invalid(format!(
                "burn_in ({}) must be smaller than n_iterations ({})",
                self.burn_in, self.n_iterations
            )));
        }
        if let Some(scales) = &self.scales {
            scales.validate()?;
        }
        Ok(())
    }

    /// The proposal scales to run with, falling back to config-derived ones.
    pub(crate) fn resolved_scales(&self, config: &SystemConfig) -> Result<ProposalScales> {
        let scales = match self.scales {
            Some(s) => s,
            None => ProposalScales::from_config(config),
        };
        scales.validate()?;
        Ok(scales)
    }
}

/// A scalar readout of the trace, for diagnostics on a single coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceScalar {
    /// Real part of `g[l]`.
    GRe(usize),
    /// Imaginary part of `g[l]`.
    GIm(usize),
    /// Real part of `h[l]`.
    HRe(usize),
    /// Imaginary part of `h[l]`.
    HIm(usize),
    /// Real part of `w[l][k]`.
    WRe(usize, usize),
    /// Imaginary part of `w[l][k]`.
    WIm(usize, usize),
    /// Constellation index in symbol slot `k`, as a float.
    SymbolIndex(usize),
}

/// The recorded path of a chain: one row per iteration, after the update.
///
/// Rows are stored flat and row-major; iteration `i` (0-based) is the state
/// after 1-based sweep `i + 1`. The initial state is not stored — with
/// thousands of burn-in iterations it carries no information.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    relays: usize,
    symbols_per_frame: usize,
    burn_in: usize,
    symbols: Vec<usize>,
    g: Vec<Complex64>,
    h: Vec<Complex64>,
    w: Option<Vec<Complex64>>,
    distance: Option<Vec<f64>>,
    log_likelihood: Option<Vec<f64>>,
    epsilon: Option<Vec<f64>>,
    accepted: Vec<bool>,
    component: Vec<usize>,
    stuck: bool,
}

impl ChainTrace {
    /// Number of recorded iterations.
    pub fn n_iterations(&self) -> usize {
        self.accepted.len()
    }

    /// Relay count `L`.
    pub fn relays(&self) -> usize {
        self.relays
    }

    /// Symbols per frame `K`.
    pub fn symbols_per_frame(&self) -> usize {
        self.symbols_per_frame
    }

    /// Burn-in length the chain was run with.
    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// True when the final [`STUCK_WINDOW`] iterations (or the whole run, if
    /// shorter) contain no accepted proposal.
    pub fn is_stuck(&self) -> bool {
        self.stuck
    }

    /// Symbol indices after iteration `i`.
    pub fn symbols_at(&self, i: usize) -> &[usize] {
        let k = self.symbols_per_frame;
        &self.symbols[i * k..(i + 1) * k]
    }

    /// `g` after iteration `i`.
    pub fn g_at(&self, i: usize) -> &[Complex64] {
        let l = self.relays;
        &self.g[i * l..(i + 1) * l]
    }

    /// `h` after iteration `i`.
    pub fn h_at(&self, i: usize) -> &[Complex64] {
        let l = self.relays;
        &self.h[i * l..(i + 1) * l]
    }

    /// `w` after iteration `i` (row-major `(l, k)`), when the chain carried it.
    pub fn w_at(&self, i: usize) -> Option<&[Complex64]> {
        let lk = self.relays * self.symbols_per_frame;
        self.w.as_ref().map(|w| &w[i * lk..(i + 1) * lk])
    }

    /// All symbol rows in iteration order.
    pub fn symbol_rows(&self) -> impl Iterator<Item = &[usize]> {
        self.symbols.chunks_exact(self.symbols_per_frame)
    }

    /// Symbol rows after burn-in.
    pub fn post_burn_in_symbol_rows(&self) -> impl Iterator<Item = &[usize]> {
        self.symbol_rows().skip(self.burn_in)
    }

    /// Per-iteration acceptance flags.
    pub fn accepted(&self) -> &[bool] {
        &self.accepted
    }

    /// Canonical index of the coordinate updated at each iteration.
    pub fn component(&self) -> &[usize] {
        &self.component
    }

    /// Tolerance in effect at each iteration (likelihood-free chains only).
    pub fn epsilon(&self) -> Option<&[f64]> {
        self.epsilon.as_deref()
    }

    /// Stored synthetic-data distance of the state after each iteration,
    /// averaged over the synthetic replicates (likelihood-free chains only).
    pub fn distance(&self) -> Option<&[f64]> {
        self.distance.as_deref()
    }

    /// Exact log-likelihood of the state after each iteration
    /// (auxiliary-variable chains only).
    pub fn log_likelihood(&self) -> Option<&[f64]> {
        self.log_likelihood.as_deref()
    }

    /// Fraction of accepted proposals over the final `window` iterations
    /// (clipped to the run length).
    pub fn acceptance_rate_tail(&self, window: usize) -> f64 {
        let n = self.accepted.len();
        let w = window.min(n).max(1);
        let hits = self.accepted[n - w..].iter().filter(|&&a| a).count();
        hits as f64 / w as f64
    }

    /// Fraction of accepted proposals after burn-in.
    pub fn acceptance_rate_post_burn_in(&self) -> f64 {
        self.acceptance_rate_tail(self.n_iterations() - self.burn_in)
    }

    /// The full series of one scalar coordinate.
    pub fn series(&self, scalar: TraceScalar) -> Vec<f64> {
        let n = self.n_iterations();
        (0..n).map(|i| self.scalar_at(i, scalar)).collect()
    }

    /// The post-burn-in series of one scalar coordinate.
    pub fn post_burn_in_series(&self, scalar: TraceScalar) -> Vec<f64> {
        let n = self.n_iterations();
        (self.burn_in..n).map(|i| self.scalar_at(i, scalar)).collect()
    }

    fn scalar_at(&self, i: usize, scalar: TraceScalar) -> f64 {
        match scalar {
            TraceScalar::GRe(l) => self.g_at(i)[l].re,
            TraceScalar::GIm(l) => self.g_at(i)[l].im,
            TraceScalar::HRe(l) => self.h_at(i)[l].re,
            TraceScalar::HIm(l) => self.h_at(i)[l].im,
            TraceScalar::WRe(l, k) => {
                self.w_at(i).expect("trace has no relay-noise coordinates")
                    [l * self.symbols_per_frame + k]
                    .re
            }
            TraceScalar::WIm(l, k) => {
                self.w_at(i).expect("trace has no relay-noise coordinates")
                    [l * self.symbols_per_frame + k]
                    .im
            }
            TraceScalar::SymbolIndex(k) => self.symbols_at(i)[k] as f64,
        }
    }
}

/// Incremental trace recorder used by the samplers.
pub(crate) struct TraceBuilder {
    relays: usize,
    symbols_per_frame: usize,
    symbols: Vec<usize>,
    g: Vec<Complex64>,
    h: Vec<Complex64>,
    w: Option<Vec<Complex64>>,
    distance: Option<Vec<f64>>,
    log_likelihood: Option<Vec<f64>>,
    epsilon: Option<Vec<f64>>,
    accepted: Vec<bool>,
    component: Vec<usize>,
}

impl TraceBuilder {
    pub(crate) fn new(l: usize, k: usize, n: usize, with_noise_and_loglik: bool) -> TraceBuilder {
        TraceBuilder {
            relays: l,
            symbols_per_frame: k,
            symbols: Vec::with_capacity(n * k),
            g: Vec::with_capacity(n * l),
            h: Vec::with_capacity(n * l),
            w: with_noise_and_loglik.then(|| Vec::with_capacity(n * l * k)),
            distance: (!with_noise_and_loglik).then(|| Vec::with_capacity(n)),
            log_likelihood: with_noise_and_loglik.then(|| Vec::with_capacity(n)),
            epsilon: (!with_noise_and_loglik).then(|| Vec::with_capacity(n)),
            accepted: Vec::with_capacity(n),
            component: Vec::with_capacity(n),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn record(
        &mut self,
        symbols: &[usize],
        g: &[Complex64],
        h: &[Complex64],
        w: Option<&[Complex64]>,
        distance: Option<f64>,
        log_likelihood: Option<f64>,
        epsilon: Option<f64>,
        accepted: bool,
        component: usize,
    ) {
        self.symbols.extend_from_slice(symbols);
        self.g.extend_from_slice(g);
        self.h.extend_from_slice(h);
        if let Some(store) = self.w.as_mut() {
            store.extend_from_slice(w.expect("chain promised relay-noise rows"));
        }
        if let Some(store) = self.distance.as_mut() {
            store.push(distance.expect("chain promised a distance column"));
        }
        if let Some(store) = self.log_likelihood.as_mut() {
            store.push(log_likelihood.expect("chain promised a log-likelihood column"));
        }
        if let Some(store) = self.epsilon.as_mut() {
            store.push(epsilon.expect("chain promised a tolerance column"));
        }
        self.accepted.push(accepted);
        self.component.push(component);
    }

    pub(crate) fn finish(self, burn_in: usize) -> ChainTrace {
        let n = self.accepted.len();
        let window = STUCK_WINDOW.min(n);
        let stuck = window > 0 && !self.accepted[n - window..].iter().any(|&a| a);
        ChainTrace {
            relays: self.relays,
            symbols_per_frame: self.symbols_per_frame,
            burn_in,
            symbols: self.symbols,
            g: self.g,
            h: self.h,
            w: self.w,
            distance: self.distance,
            log_likelihood: self.log_likelihood,
            epsilon: self.epsilon,
            accepted: self.accepted,
            component: self.component,
            stuck,
        }
    }
}

/// Shared Metropolis accept decision in log space.
///
/// `log_num` is the log of the proposal's prior-times-weight factor minus the
/// current state's log prior (i.e. everything except the current weight);
/// `log_weight_cur` is the current state's log weight. Negative-infinite
/// numerators reject; a negative-infinite current weight accepts any proposal
/// with positive weight (the chain is escaping a zero-mass state).
pub(crate) fn metropolis_accept<R: rand::Rng + ?Sized>(
    rng: &mut R,
    log_num: f64,
    log_weight_cur: f64,
) -> bool {
    if log_num == f64::NEG_INFINITY || log_num.is_nan() {
        return false;
    }
    if log_weight_cur == f64::NEG_INFINITY {
        return true;
    }
    let log_alpha = log_num - log_weight_cur;
    log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_index_round_trips() {
        let (l, k) = (3, 2);
        let total = k + 2 * l + l * k;
        for idx in 0..total {
            let c = Component::from_canonical(idx, l, k);
            assert_eq!(c.canonical_index(l, k), idx);
        }
        assert_eq!(Component::Symbol(1).canonical_index(l, k), 1);
        assert_eq!(Component::G(0).canonical_index(l, k), 2);
        assert_eq!(Component::H(0).canonical_index(l, k), 5);
        assert_eq!(Component::W { l: 2, k: 1 }.canonical_index(l, k), 8 + 5);
    }

    #[test]
    fn component_list_respects_clamps() {
        let full = component_list(2, 2, false, true, false);
        assert_eq!(full.len(), 2 + 4 + 4);
        assert_eq!(full[0], Component::Symbol(0));
        assert_eq!(full[2], Component::G(0));
        assert_eq!(full[4], Component::H(0));
        assert_eq!(full[6], Component::W { l: 0, k: 0 });
        let clamped = component_list(2, 2, true, true, true);
        assert_eq!(clamped, vec![Component::Symbol(0), Component::Symbol(1)]);
        let abc = component_list(2, 2, false, false, false);
        assert_eq!(abc.len(), 6);
    }

    #[test]
    fn settings_validation() {
        assert!(SamplerSettings::new(0, 0).is_err());
        assert!(SamplerSettings::new(10, 10).is_err());
        assert!(SamplerSettings::new(10, 9).is_ok());
        let bad = SamplerSettings::standard().with_scales(ProposalScales {
            sigma_g_sq: 0.0,
            sigma_h_sq: 0.1,
            sigma_w_sq: 0.1,
        });
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trace_builder_round_trip() {
        let one = Complex64::new(1.0, 0.0);
        let mut b = TraceBuilder::new(1, 2, 3, false);
        b.record(&[0, 1], &[one], &[one], None, Some(1.5), None, Some(9.0), true, 0);
        b.record(&[2, 1], &[2.0 * one], &[one], None, Some(0.5), None, Some(8.0), false, 2);
        let trace = b.finish(1);
        assert_eq!(trace.n_iterations(), 2);
        assert_eq!(trace.symbols_at(1), &[2, 1]);
        assert_eq!(trace.g_at(1)[0], 2.0 * one);
        assert_eq!(trace.epsilon().unwrap(), &[9.0, 8.0]);
        assert_eq!(trace.distance().unwrap(), &[1.5, 0.5]);
        assert!(trace.log_likelihood().is_none());
        assert_eq!(trace.post_burn_in_symbol_rows().count(), 1);
        assert_eq!(trace.series(TraceScalar::GRe(0)), vec![1.0, 2.0]);
        assert_eq!(trace.post_burn_in_series(TraceScalar::GRe(0)), vec![2.0]);
        assert_eq!(trace.acceptance_rate_tail(2), 0.5);
        // Two iterations with one acceptance: not stuck.
        assert!(!trace.is_stuck());
    }

    #[test]
    fn stuck_needs_a_fully_rejected_tail() {
        let one = Complex64::new(1.0, 0.0);
        let mut b = TraceBuilder::new(1, 1, 4, false);
        for i in 0..4 {
            b.record(&[0], &[one], &[one], None, Some(1.0), None, Some(1.0), i == 0, 0);
        }
        // Acceptance only in the first row; window covers the whole short run.
        let trace = b.finish(1);
        assert!(!trace.is_stuck());
        let mut b = TraceBuilder::new(1, 1, 4, false);
        for _ in 0..4 {
            b.record(&[0], &[one], &[one], None, Some(1.0), None, Some(1.0), false, 0);
        }
        assert!(b.finish(1).is_stuck());
    }

    #[test]
    fn metropolis_accept_handles_zero_mass_states() {
        let mut rng = crate::rng::RngStream::new(7).rng();
        assert!(!metropolis_accept(&mut rng, f64::NEG_INFINITY, 0.0));
        assert!(!metropolis_accept(&mut rng, f64::NEG_INFINITY, f64::NEG_INFINITY));
        assert!(metropolis_accept(&mut rng, -1e-9, f64::NEG_INFINITY));
        assert!(metropolis_accept(&mut rng, 0.5, 0.0));
        // Strongly negative log ratio: essentially never accepted.
        let hits = (0..2000)
            .filter(|_| metropolis_accept(&mut rng, -40.0, 0.0))
            .count();
        assert_eq!(hits, 0);
    }

    #[test]
    fn scan_mode_serde_uses_snake_case() {
        assert_eq!(serde_json::to_string(&ScanMode::Systematic).unwrap(), "\"systematic\"");
        let m: ScanMode = serde_json::from_str("\"random\"").unwrap();
        assert_eq!(m, ScanMode::Random);
    }
}
