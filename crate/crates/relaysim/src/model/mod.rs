//! The network model: constellation and codeword prior, channel state
//! information, relay nonlinearities, noise levels, and the forward simulator
//! that maps a codeword to a received frame.
//!
//! A frame carries `K` symbols through `L` parallel relays. Relay `l` receives
//! `r[l][k] = s[k] * h[l] + w[l][k]`, applies a memoryless function `f`, and
//! the destination sees `y[l][k] = f(r[l][k]) * g[l] + v[l][k]`. The
//! destination never knows `h` and `g` exactly, only the estimates and error
//! variances in [`ChannelCsi`].

mod channel;
mod config;
mod constellation;
mod forward;
mod prior;
mod relay;

pub use channel::{draw_channels, ChannelCsi, ChannelRealization};
pub use config::{snr_to_noise, NoiseSpec, SystemConfig};
pub use constellation::{Codeword, Constellation};
pub use forward::{
    destination_means, linear_likelihood, linear_log_likelihood, simulate_forward,
    simulate_forward_detailed, simulate_forward_with, FrameDraw, Observation,
};
pub(crate) use forward::simulate_forward_flat;
pub use prior::CodewordPrior;
pub use relay::{ComplexMode, RelayFunction, RelayKind};
