//! Forward simulation of one frame and the closed-form linear-relay
//! likelihood.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::channel::ChannelRealization;
use crate::model::config::SystemConfig;
use crate::model::constellation::Codeword;
use crate::rng::RngStream;
use crate::numerics::{cn_log_density, draw_cn};
use crate::Result;

/// A received frame: `rows[l][k]` is what the destination sees from relay `l`
/// in symbol slot `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Per-relay rows of `K` received values.
    pub rows: Vec<Vec<Complex64>>,
}

impl Observation {
    /// Number of relays `L`.
    pub fn relays(&self) -> usize {
        self.rows.len()
    }

    /// Symbols per frame `K`.
    pub fn symbols_per_frame(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// All entries in row-major order (relay index moves slowest).
    pub fn iter_flat(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.rows.iter().flat_map(|row| row.iter().copied())
    }

    /// Entries collected into a flat row-major buffer.
    pub fn to_flat(&self) -> Vec<Complex64> {
        self.iter_flat().collect()
    }
}

/// A simulated frame together with the latent variables that produced it.
#[derive(Debug, Clone)]
pub struct FrameDraw {
    /// The received frame.
    pub y: Observation,
    /// Relay-input noise, `w[l][k]`.
    pub w: Vec<Vec<Complex64>>,
}

/// Noise-free destination means `f(s[k] * h[l] + w[l][k]) * g[l]`.
///
/// With `w = None` the relay inputs are taken as `s[k] * h[l]` exactly.
pub fn destination_means(
    config: &SystemConfig,
    symbols: &[f64],
    channels: &ChannelRealization,
    w: Option<&[Vec<Complex64>]>,
) -> Result<Vec<Vec<Complex64>>> {
    let l = channels.h.len();
    let mut rows = Vec::with_capacity(l);
    for li in 0..l {
        let mut row = Vec::with_capacity(symbols.len());
        for (ki, &s) in symbols.iter().enumerate() {
            let mut r = channels.h[li] * s;
            if let Some(w) = w {
                r += w[li][ki];
            }
            row.push(config.relay.apply(r)? * channels.g[li]);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Simulate one frame on a deterministic stream.
pub fn simulate_forward(
    config: &SystemConfig,
    s: &Codeword,
    channels: &ChannelRealization,
    stream: RngStream,
) -> Result<Observation> {
    Ok(simulate_forward_detailed(config, s, channels, stream)?.y)
}

/// Simulate one frame, also returning the relay-input noise realization.
///
/// Uses the same draw order as [`simulate_forward`], so both produce the same
/// frame on the same stream.
pub fn simulate_forward_detailed(
    config: &SystemConfig,
    s: &Codeword,
    channels: &ChannelRealization,
    stream: RngStream,
) -> Result<FrameDraw> {
    let symbols = s.symbols(&config.constellation);
    let mut rng = stream.rng();
    simulate_forward_with(config, &symbols, channels, &mut rng)
}

/// Simulation body on an already-instantiated generator.
///
/// Draw order per element, relay-major: `w[l][k]` then `v[l][k]`.
pub fn simulate_forward_with<R: Rng + ?Sized>(
    config: &SystemConfig,
    symbols: &[f64],
    channels: &ChannelRealization,
    rng: &mut R,
) -> Result<FrameDraw> {
    let l = channels.h.len();
    let k = symbols.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut rows = Vec::with_capacity(l);
    let mut w_rows = Vec::with_capacity(l);
    for li in 0..l {
        let mut row = Vec::with_capacity(k);
        let mut w_row = Vec::with_capacity(k);
        for &s in symbols {
            let w = draw_cn(zero, config.noise.sigma_w_sq, rng);
            let v = draw_cn(zero, config.noise.sigma_v_sq, rng);
            let relayed = config.relay.apply(channels.h[li] * s + w)?;
            row.push(relayed * channels.g[li] + v);
            w_row.push(w);
        }
        rows.push(row);
        w_rows.push(w_row);
    }
    Ok(FrameDraw { y: Observation { rows }, w: w_rows })
}

/// Allocation-free simulation into a flat row-major buffer, for samplers.
///
/// `out` must hold `L * K` entries. Same draw order as the other simulators.
#[inline]
pub(crate) fn simulate_forward_flat<R: Rng + ?Sized>(
    config: &SystemConfig,
    symbols: &[f64],
    h: &[Complex64],
    g: &[Complex64],
    out: &mut [Complex64],
    rng: &mut R,
) -> Result<()> {
    debug_assert_eq!(out.len(), h.len() * symbols.len());
    let zero = Complex64::new(0.0, 0.0);
    let mut idx = 0;
    for li in 0..h.len() {
        for &s in symbols {
            let w = draw_cn(zero, config.noise.sigma_w_sq, rng);
            let v = draw_cn(zero, config.noise.sigma_v_sq, rng);
            out[idx] = config.relay.apply(h[li] * s + w)? * g[li] + v;
            idx += 1;
        }
    }
    Ok(())
}

/// Log-likelihood of a frame under the linear relay, where the latent relay
/// noise integrates out in closed form: each entry is
/// `CN(s[k] * h[l] * g[l], |g[l]|^2 * sigma_w_sq + sigma_v_sq)`.
///
/// Only valid when the configured relay is the identity map.
pub fn linear_log_likelihood(
    config: &SystemConfig,
    y: &Observation,
    s: &Codeword,
    channels: &ChannelRealization,
) -> Result<f64> {
    if !config.relay.is_linear() {
        return Err(Error::invalid(
            "closed-form likelihood requires the linear relay; use a sampler instead",
        ));
    }
    let symbols = s.symbols(&config.constellation);
    let mut total = 0.0;
    for (li, row) in y.rows.iter().enumerate() {
        let variance = channels.g[li].norm_sqr() * config.noise.sigma_w_sq + config.noise.sigma_v_sq;
        let hg = channels.h[li] * channels.g[li];
        for (ki, &yv) in row.iter().enumerate() {
            total += cn_log_density(yv, hg * symbols[ki], variance);
        }
    }
    Ok(total)
}

/// Likelihood form of [`linear_log_likelihood`].
pub fn linear_likelihood(
    config: &SystemConfig,
    y: &Observation,
    s: &Codeword,
    channels: &ChannelRealization,
) -> Result<f64> {
    Ok(linear_log_likelihood(config, y, s, channels)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::channel::ChannelCsi;
    use crate::model::config::NoiseSpec;
    use crate::model::constellation::Constellation;
    use crate::model::prior::CodewordPrior;
    use crate::model::relay::RelayFunction;
    use approx::assert_relative_eq;

    fn linear_config(l: usize, k: usize, sw: f64, sv: f64) -> SystemConfig {
        let constellation = Constellation::pam4();
        let prior = CodewordPrior::uniform(4, k).unwrap();
        SystemConfig::new(
            constellation,
            prior,
            ChannelCsi::unit(l, 0.1, 0.1).unwrap(),
            NoiseSpec::new(sw, sv).unwrap(),
            RelayFunction::linear(),
        )
        .unwrap()
    }

    #[test]
    fn observation_shape_and_flat_order() {
        let config = linear_config(2, 3, 0.1, 0.1);
        let channels = ChannelRealization::from_estimates(&config.csi);
        let y = simulate_forward(&config, &Codeword(vec![0, 1, 2]), &channels, RngStream::new(1))
            .unwrap();
        assert_eq!(y.relays(), 2);
        assert_eq!(y.symbols_per_frame(), 3);
        let flat = y.to_flat();
        assert_eq!(flat.len(), 6);
        assert_eq!(flat[4], y.rows[1][1]);
    }

    #[test]
    fn simulation_is_deterministic_per_stream() {
        let config = linear_config(3, 2, 0.2, 0.3);
        let channels = ChannelRealization::from_estimates(&config.csi);
        let s = Codeword(vec![1, 3]);
        let a = simulate_forward(&config, &s, &channels, RngStream::with_stream(5, 2)).unwrap();
        let b = simulate_forward(&config, &s, &channels, RngStream::with_stream(5, 2)).unwrap();
        assert_eq!(a, b);
        let c = simulate_forward(&config, &s, &channels, RngStream::with_stream(5, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn detailed_draw_matches_plain_draw() {
        let config = linear_config(2, 2, 0.2, 0.3);
        let channels = ChannelRealization::from_estimates(&config.csi);
        let s = Codeword(vec![0, 2]);
        let stream = RngStream::new(9);
        let plain = simulate_forward(&config, &s, &channels, stream).unwrap();
        let detailed = simulate_forward_detailed(&config, &s, &channels, stream).unwrap();
        assert_eq!(plain, detailed.y);
        assert_eq!(detailed.w.len(), 2);
        assert_eq!(detailed.w[0].len(), 2);
    }

    #[test]
    fn linear_forward_moments_match_closed_form() {
        // At fixed channels the linear-relay output has mean s*h*g and total
        // variance |g|^2 * sw + sv.
        let (sw, sv) = (0.5, 0.25);
        let config = linear_config(1, 1, sw, sv);
        let channels = ChannelRealization {
            h: vec![Complex64::new(0.8, 0.3)],
            g: vec![Complex64::new(1.1, -0.4)],
        };
        let s = Codeword(vec![3]); // symbol value 3
        let n = 100_000;
        let mut rng = RngStream::new(33).rng();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        let symbols = s.symbols(&config.constellation);
        for _ in 0..n {
            let d = simulate_forward_with(&config, &symbols, &channels, &mut rng).unwrap();
            sum += d.y.rows[0][0];
            sq += d.y.rows[0][0].norm_sqr();
        }
        let mean = sum / n as f64;
        let expect_mean = channels.h[0] * channels.g[0] * 3.0;
        assert!((mean - expect_mean).norm() < 0.02, "mean {mean} vs {expect_mean}");
        let var = sq / n as f64 - mean.norm_sqr();
        let expect_var = channels.g[0].norm_sqr() * sw + sv;
        assert_relative_eq!(var, expect_var, max_relative = 0.03);
    }

    #[test]
    fn tanh_saturates_large_inputs() {
        let mut config = linear_config(1, 1, 1e-30, 1e-30);
        config.relay = RelayFunction::tanh();
        let channels = ChannelRealization {
            h: vec![Complex64::new(1.0, 0.0)],
            g: vec![Complex64::new(1.0, 0.0)],
        };
        let y = simulate_forward(&config, &Codeword(vec![3]), &channels, RngStream::new(0)).unwrap();
        assert_relative_eq!(y.rows[0][0].re, 3.0_f64.tanh(), epsilon = 1e-9);
        assert!(y.rows[0][0].re < 1.0);
    }

    #[test]
    fn noiseless_limit_is_deterministic() {
        let config = linear_config(2, 2, 1e-30, 1e-30);
        let channels = ChannelRealization::from_estimates(&config.csi);
        let s = Codeword(vec![1, 3]);
        let y = simulate_forward(&config, &s, &channels, RngStream::new(4)).unwrap();
        for (li, row) in y.rows.iter().enumerate() {
            for (ki, v) in row.iter().enumerate() {
                let expect =
                    channels.h[li] * s.symbols(&config.constellation)[ki] * channels.g[li];
                assert!((v - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_likelihood_peak_value() {
        // K = 1, L = 1, s = 1, h = g = 1, sw = sv = 0.5: variance 1, so the
        // density at y = 0 is exp(-1) / pi.
        let config = linear_config(1, 1, 0.5, 0.5);
        let channels = ChannelRealization::from_estimates(&config.csi);
        let y = Observation { rows: vec![vec![Complex64::new(0.0, 0.0)]] };
        let s = Codeword(vec![2]); // symbol value 1
        let p = linear_likelihood(&config, &y, &s, &channels).unwrap();
        assert_relative_eq!(p, (-1.0_f64).exp() / std::f64::consts::PI, max_relative = 1e-10);
    }

    #[test]
    fn linear_likelihood_integrates_to_one() {
        // Importance sampling with an overdispersed proposal: E[p/q] = 1.
        let config = linear_config(1, 1, 0.5, 0.5);
        let channels = ChannelRealization::from_estimates(&config.csi);
        let s = Codeword(vec![2]);
        let mean = channels.h[0] * channels.g[0];
        let variance = channels.g[0].norm_sqr() * 0.5 + 0.5;
        let mut rng = RngStream::new(8).rng();
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let yv = draw_cn(mean, 2.0 * variance, &mut rng);
            let y = Observation { rows: vec![vec![yv]] };
            let p = linear_likelihood(&config, &y, &s, &channels).unwrap();
            let q = crate::numerics::cn_density(yv, mean, 2.0 * variance);
            acc += p / q;
        }
        assert_relative_eq!(acc / n as f64, 1.0, max_relative = 0.02);
    }

    #[test]
    fn linear_likelihood_rejects_nonlinear_relay() {
        let mut config = linear_config(1, 1, 0.5, 0.5);
        config.relay = RelayFunction::tanh();
        let channels = ChannelRealization::from_estimates(&config.csi);
        let y = Observation { rows: vec![vec![Complex64::new(0.0, 0.0)]] };
        assert!(linear_log_likelihood(&config, &y, &Codeword(vec![0]), &channels).is_err());
    }

    #[test]
    fn flat_simulation_matches_row_simulation() {
        let config = linear_config(2, 2, 0.3, 0.4);
        let channels = ChannelRealization::from_estimates(&config.csi);
        let s = Codeword(vec![1, 2]);
        let symbols = s.symbols(&config.constellation);
        let stream = RngStream::new(12);
        let rows = simulate_forward(&config, &s, &channels, stream).unwrap();
        let mut flat = vec![Complex64::new(0.0, 0.0); 4];
        simulate_forward_flat(
            &config,
            &symbols,
            &channels.h,
            &channels.g,
            &mut flat,
            &mut stream.rng(),
        )
        .unwrap();
        assert_eq!(flat, rows.to_flat());
    }
}
