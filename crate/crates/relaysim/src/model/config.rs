//! Noise levels and the complete system description.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::channel::ChannelCsi;
use crate::model::constellation::Constellation;
use crate::model::prior::CodewordPrior;
use crate::model::relay::RelayFunction;
use crate::Result;

/// Total variances of the relay-input noise `w` and destination noise `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Total variance of the noise added at each relay input.
    pub sigma_w_sq: f64,
    /// Total variance of the noise added at the destination.
    pub sigma_v_sq: f64,
}

impl NoiseSpec {
    /// Build a noise spec, rejecting non-positive variances.
    pub fn new(sigma_w_sq: f64, sigma_v_sq: f64) -> Result<Self> {
        let spec = NoiseSpec { sigma_w_sq, sigma_v_sq };
        spec.validate()?;
        Ok(spec)
    }

    /// Check both variances are finite and positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_w_sq", self.sigma_w_sq), ("sigma_v_sq", self.sigma_v_sq)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Map a per-hop SNR in dB to noise variances.
///
/// Both hops use the same level: `sigma^2 = E_s / 10^(snr_db / 10)` where
/// `E_s` is the constellation's mean symbol energy. For 4-PAM (`E_s = 5`),
/// 10 dB gives `sigma_w_sq = sigma_v_sq = 0.5`.
pub fn snr_to_noise(snr_db: f64, constellation: &Constellation) -> Result<NoiseSpec> {
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("snr_db must be finite, got {snr_db}")));
    }
    let sigma = constellation.mean_energy() / 10f64.powf(snr_db / 10.0);
    NoiseSpec::new(sigma, sigma)
}

/// Everything needed to simulate one frame: alphabet, prior, CSI, noise and
/// the relay function. Dimensions: `L` relays from the CSI, `K` symbols from
/// the prior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Symbol alphabet.
    pub constellation: Constellation,
    /// Prior over length-`K` codewords.
    pub prior: CodewordPrior,
    /// Channel estimates and error variances for the `L` relays.
    pub csi: ChannelCsi,
    /// Noise variances for both hops.
    pub noise: NoiseSpec,
    /// Relay input-output behaviour.
    pub relay: RelayFunction,
}

impl SystemConfig {
    /// Build a config and validate cross-field consistency.
    pub fn new(
        constellation: Constellation,
        prior: CodewordPrior,
        csi: ChannelCsi,
        noise: NoiseSpec,
        relay: RelayFunction,
    ) -> Result<Self> {
        let config = SystemConfig { constellation, prior, csi, noise, relay };
        config.validate()?;
        Ok(config)
    }

    /// The default setup: 4-PAM, `K = 2`, the two-spike prior (0.3 on
    /// `[1, 1]` and `[-1, 1]`, rest spread equally), unit channel estimates
    /// with error variance 0.1 on both hops, componentwise tanh relays, and
    /// noise set from a 15 dB per-hop SNR.
    pub fn default_setup(l: usize) -> Result<Self> {
        let constellation = Constellation::pam4();
        let prior =
            CodewordPrior::spiked(&constellation, 2, &[(&[1.0, 1.0], 0.3), (&[-1.0, 1.0], 0.3)])?;
        let noise = snr_to_noise(15.0, &constellation)?;
        SystemConfig::new(
            constellation,
            prior,
            ChannelCsi::unit(l, 0.1, 0.1)?,
            noise,
            RelayFunction::tanh(),
        )
    }

    /// Number of relays `L`.
    pub fn relays(&self) -> usize {
        self.csi.relays()
    }

    /// Symbols per frame `K`.
    pub fn symbols_per_frame(&self) -> usize {
        self.prior.k()
    }

    /// Check every component and their dimensional consistency.
    pub fn validate(&self) -> Result<()> {
        self.csi.validate()?;
        self.noise.validate()?;
        if self.prior.m() != self.constellation.order() {
            return Err(Error::invalid(format!(
                "prior is over an alphabet of {} symbols but the constellation has {}",
                self.prior.m(),
                self.constellation.order()
            )));
        }
        Ok(())
    }

    /// This config with the relay count reduced to the first `l` relays.
    pub fn with_relays(&self, l: usize) -> Result<Self> {
        let mut c = self.clone();
        c.csi = self.csi.truncated(l)?;
        Ok(c)
    }

    /// This config with different noise variances.
    pub fn with_noise(&self, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        let mut c = self.clone();
        c.noise = noise;
        Ok(c)
    }

    /// Parse and validate a config from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SystemConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}
