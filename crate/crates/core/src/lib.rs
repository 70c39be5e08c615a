//! Adaptive estimation of a 1-periodic signal observed on a discrete grid
//! under noise mixing a Lévy process with a semi-Markov jump process.
//!
//! The crate is organised along the estimation pipeline:
//!
//! - [`signal`]: target signals, the trigonometric basis and its step
//!   version, discrete Fourier coefficients.
//! - [`noise`]: noise and observation-path samplers with keyed RNG streams.
//! - [`renewal`]: renewal density solver and noise-level scalars.
//! - [`estimator`]: coefficient estimates, proxy-variance estimate, Pinsker
//!   weight families and the penalized model-selection procedure.
//! - [`risk`]: Monte Carlo risk harness and the Pinsker constant.

pub mod error;
pub mod estimator;
pub mod noise;
pub mod renewal;
pub mod risk;
pub mod signal;

pub use error::{Error, Result};
