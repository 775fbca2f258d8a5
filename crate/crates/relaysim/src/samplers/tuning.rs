//! Proposal-scale search via short pilot chains.
//!
//! Random-walk Metropolis mixes best in a band of intermediate acceptance
//! rates: too-timid proposals accept almost everything but barely move, and
//! too-bold proposals are almost always rejected. The tuner runs short pilot
//! chains, measures acceptance over the second half of each pilot (past the
//! tolerance anneal for the likelihood-free chain), and rescales the proposal
//! variances multiplicatively until the rate lands in the target band.
//!
//! The scale factor moves in powers of a step that starts at 2 and shrinks by
//! square roots whenever the search direction reverses — a geometric
//! bisection on the log-scale axis.

use serde::{Deserialize, Serialize};

use crate::abc::ResolvedAbcSpec;
use crate::model::{Observation, SystemConfig};
use crate::rng::RngStream;
use crate::samplers::{
    run_mcmc_abc, run_mcmc_av, ProposalScales, SamplerSettings,
};
use crate::{Error, Result};

/// Which chain the tuner should drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// The likelihood-free chain ([`run_mcmc_abc`]).
    Abc,
    /// The exact-likelihood chain on the augmented state ([`run_mcmc_av`]).
    AuxiliaryVariable,
}

/// Tuning control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneOptions {
    /// Iterations per pilot chain.
    #[serde(default = "default_pilot_iterations")]
    pub pilot_iterations: usize,
    /// Pilot chains to run before giving up.
    #[serde(default = "default_max_pilots")]
    pub max_pilots: usize,
    /// Lower edge of the target acceptance band.
    #[serde(default = "default_target_low")]
    pub target_low: f64,
    /// Upper edge of the target acceptance band.
    #[serde(default = "default_target_high")]
    pub target_high: f64,
}

fn default_pilot_iterations() -> usize {
    2_000
}

fn default_max_pilots() -> usize {
    20
}

fn default_target_low() -> f64 {
    0.3
}

fn default_target_high() -> f64 {
    0.5
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            pilot_iterations: default_pilot_iterations(),
            max_pilots: default_max_pilots(),
            target_low: default_target_low(),
            target_high: default_target_high(),
        }
    }
}

impl TuneOptions {
    /// Check band and lengths are sensible.
    pub fn validate(&self) -> Result<()> {
        if self.pilot_iterations < 20 {
            return Err(Error::invalid("pilot chains need at least 20 iterations"));
        }
        if self.max_pilots == 0 {
            return Err(Error::invalid("max_pilots must be at least 1"));
        }
        if !(self.target_low > 0.0
            && self.target_low < self.target_high
            && self.target_high < 1.0)
        {
            return Err(Error::invalid(format!(
                "acceptance band must satisfy 0 < low < high < 1, got [{}, {}]",
                self.target_low, self.target_high
            )));
        }
        Ok(())
    }
}

/// Result of a tuning run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    /// The scales to run with — the first in-band set, or the last tried.
    pub scales: ProposalScales,
    /// Acceptance rate measured for those scales.
    pub acceptance_rate: f64,
    /// Pilot chains consumed.
    pub pilots_run: usize,
    /// Whether the rate landed inside the target band.
    pub converged: bool,
}

/// Search for proposal scales whose acceptance rate falls inside the target
/// band, starting from `base`'s scales (or config-derived defaults).
///
/// `abc` must be provided when `kind` is [`SamplerKind::Abc`] and is ignored
/// otherwise. Pilot chains use streams derived from `stream`, so the search
/// is deterministic. A search that exhausts `max_pilots` returns the last
/// scales tried with `converged: false` — callers decide whether that is
/// acceptable.
pub fn tune_proposals(
    kind: SamplerKind,
    config: &SystemConfig,
    observation: &Observation,
    abc: Option<&ResolvedAbcSpec>,
    base: &SamplerSettings,
    options: &TuneOptions,
    stream: RngStream,
) -> Result<TuneOutcome> {
    options.validate()?;
    base.validate()?;
    if kind == SamplerKind::Abc && abc.is_none() {
        return Err(Error::invalid(
            "tuning the likelihood-free chain needs its acceptance spec",
        ));
    }

    let base_scales = base.resolved_scales(config)?;
    let pilot_n = options.pilot_iterations;
    let pilot_burn = pilot_n / 2;
    let window = pilot_n - pilot_burn;

    let mut factor = 1.0f64;
    let mut step = 2.0f64;
    let mut last_direction_up: Option<bool> = None;
    let mut last = TuneOutcome {
        scales: base_scales,
        acceptance_rate: f64::NAN,
        pilots_run: 0,
        converged: false,
    };

    for pilot in 0..options.max_pilots {
        let scales = base_scales.scaled_by(factor);
        let mut settings = base.clone();
        settings.n_iterations = pilot_n;
        settings.burn_in = pilot_burn;
        settings.scales = Some(scales);

        let pilot_stream = stream.derive(pilot as u64);
        let trace = match kind {
            SamplerKind::Abc => run_mcmc_abc(
                config,
                observation,
                abc.expect("checked above"),
                &settings,
                pilot_stream,
            )?,
            SamplerKind::AuxiliaryVariable => {
                run_mcmc_av(config, observation, &settings, pilot_stream)?
            }
        };
        let acceptance = trace.acceptance_rate_tail(window);
        last = TuneOutcome {
            scales,
            acceptance_rate: acceptance,
            pilots_run: pilot + 1,
            converged: acceptance >= options.target_low && acceptance <= options.target_high,
        };
        if last.converged {
            return Ok(last);
        }

        // High acceptance calls for bolder proposals, low for timider ones.
        let direction_up = acceptance > options.target_high;
        if let Some(prev) = last_direction_up {
            if prev != direction_up {
                step = step.sqrt();
            }
        }
        factor *= if direction_up { step } else { 1.0 / step };
        last_direction_up = Some(direction_up);
    }

    log::warn!(
        "proposal tuning did not reach [{}, {}] after {} pilots; last acceptance {:.3}",
        options.target_low,
        options.target_high,
        options.max_pilots,
        last.acceptance_rate
    );
    Ok(last)
}
