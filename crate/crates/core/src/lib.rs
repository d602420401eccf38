//! Excitation-domain neural vocoding.
//!
//! Speech is split by a time-varying linear-prediction inverse filter into a
//! spectral envelope and a residual excitation. A compact autoregressive
//! dilated-convolution network models the 8-bit mu-law excitation
//! conditioned on per-frame acoustic features, and speech is rebuilt by the
//! matching all-pole synthesis filter. Two baselines share the same network:
//! one models the speech waveform directly, the other a residual whitened by a
//! fixed corpus-average filter.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root pick the precision used by the pipeline.

pub mod conditioning;
pub mod error;
pub mod features;
pub mod lp;
pub mod metrics;
pub mod nn;
pub mod scalar;
pub mod signal;
pub mod vocoder;

pub use error::{Error, Result};
pub use scalar::Real;

/// Waveform in the analysis precision.
pub type Waveform = signal::Waveform<f64>;
pub type LpcCoefficients = lp::LpcCoefficients<f64>;
pub type LsfVector = lp::LsfVector<f64>;
