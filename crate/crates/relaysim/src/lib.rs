//! Simulation and symbol detection for two-hop relay networks in which every
//! relay applies a memoryless (possibly nonlinear) function to what it receives
//! and the destination only knows noisy channel estimates.
//!
//! The crate is organised as a library plus a directory of runnable examples;
//! each example exercises one capability end to end:
//!
//! - `simulate_frame` — draw channels, push a codeword through the relays and
//!   print the received frame (`cargo run -p relaysim --example simulate_frame`)
//! - `abc_detection` — detect one frame with the likelihood-free MCMC sampler
//! - `av_detection` — detect one frame with the auxiliary-variable sampler
//! - `baseline_detectors` — exhaustive-search and oracle baselines on a frame
//! - `tune_scales` — pilot-run search for random walk proposal scales
//! - `chain_diagnostics` — autocorrelation, empirical CDFs and acceptance rates
//! - `ser_sweep` — symbol error rate over a relay-count x SNR grid
//! - `tolerance_study` — mixing/accuracy trade-off across ABC tolerances
//!
//! The same capabilities are reachable from the thin `relaysim` binary
//! (`simulate`, `detect`, `sweep`, `tolerance-study`, `tune`, `plot`), which
//! reads JSON configuration files and writes CSV/SVG artifacts; see
//! `docs/file_formats.md` for the schemas.
//!
//! All randomness flows through [`rng::RngStream`], a counter-keyed generator:
//! a run is a pure function of its configuration and master seed, independent
//! of thread count.

pub mod abc;
pub mod cli;
pub mod detectors;
pub mod diagnostics;
pub mod error;
pub mod fingerprint;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod samplers;

pub use error::Error;
pub use num_complex::Complex64;

/// Crate-wide `Result` alias.
pub type Result<T> = std::result::Result<T, Error>;
