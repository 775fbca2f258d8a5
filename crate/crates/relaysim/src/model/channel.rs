//! Channel state information and channel realizations.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numerics::draw_cn;
use crate::Result;

/// What the destination knows about the channels: per-relay estimates plus the
/// estimation error variances. The true coefficients are distributed as
/// `h[l] ~ CN(h_hat[l], sigma_h_sq)` and `g[l] ~ CN(g_hat[l], sigma_g_sq)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelCsi {
    /// Estimated source-to-relay coefficients, one per relay.
    pub h_hat: Vec<Complex64>,
    /// Estimated relay-to-destination coefficients, one per relay.
    pub g_hat: Vec<Complex64>,
    /// Total variance of the `h` estimation error, shared by all relays.
    pub sigma_h_sq: f64,
    /// Total variance of the `g` estimation error, shared by all relays.
    pub sigma_g_sq: f64,
}

impl ChannelCsi {
    /// CSI with all estimates equal to `1 + 0i`, the default setup.
    pub fn unit(l: usize, sigma_h_sq: f64, sigma_g_sq: f64) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let csi = ChannelCsi { h_hat: vec![one; l], g_hat: vec![one; l], sigma_h_sq, sigma_g_sq };
        csi.validate()?;
        Ok(csi)
    }

    /// Number of relays `L`.
    pub fn relays(&self) -> usize {
        self.h_hat.len()
    }

    /// Check dimensions, finiteness and positive variances.
    pub fn validate(&self) -> Result<()> {
        if self.h_hat.is_empty() {
            return Err(Error::invalid("csi needs at least one relay"));
        }
        if self.h_hat.len() != self.g_hat.len() {
            return Err(Error::invalid(format!(
                "csi has {} h estimates but {} g estimates",
                self.h_hat.len(),
                self.g_hat.len()
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !self.h_hat.iter().all(finite) || !self.g_hat.iter().all(finite) {
            return Err(Error::invalid("csi estimates must be finite"));
        }
        for (name, v) in [("sigma_h_sq", self.sigma_h_sq), ("sigma_g_sq", self.sigma_g_sq)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// CSI restricted to the first `l` relays.
    pub fn truncated(&self, l: usize) -> Result<Self> {
        if l == 0 || l > self.relays() {
            return Err(Error::invalid(format!(
                "cannot take {l} relays from csi with {}",
                self.relays()
            )));
        }
        Ok(ChannelCsi {
            h_hat: self.h_hat[..l].to_vec(),
            g_hat: self.g_hat[..l].to_vec(),
            sigma_h_sq: self.sigma_h_sq,
            sigma_g_sq: self.sigma_g_sq,
        })
    }
}

/// One realization of the true channel coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// True source-to-relay coefficients.
    pub h: Vec<Complex64>,
    /// True relay-to-destination coefficients.
    pub g: Vec<Complex64>,
}

impl ChannelRealization {
    /// The realization that equals the CSI estimates exactly.
    pub fn from_estimates(csi: &ChannelCsi) -> Self {
        ChannelRealization { h: csi.h_hat.clone(), g: csi.g_hat.clone() }
    }
}

/// Draw true channels from the CSI prior.
pub fn draw_channels<R: Rng + ?Sized>(csi: &ChannelCsi, rng: &mut R) -> ChannelRealization {
    let h = csi.h_hat.iter().map(|&m| draw_cn(m, csi.sigma_h_sq, rng)).collect();
    let g = csi.g_hat.iter().map(|&m| draw_cn(m, csi.sigma_g_sq, rng)).collect();
    ChannelRealization { h, g }
}
