//! Waveforms, WAV I/O, mu-law companding and frame slicing.

mod frame;
mod mulaw;
mod wav;

pub use frame::{frame_signal, FrameGrid, Window};
pub use mulaw::{
    companded, mu_law_decode, mu_law_encode, mu_law_expand, SymbolSequence, MU_LAW_CLASSES,
};
pub use wav::{read_wav, write_wav, WriteReport};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 24_000;

/// Mono sample sequence with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T> {
    pub samples: Vec<T>,
    pub sample_rate_hz: u32,
}

impl<T: Real> Waveform<T> {
    /// Builds a waveform, rejecting non-finite samples and a zero rate.
    /// Amplitudes outside [-1, 1] are accepted here; they are clipped on write.
    pub fn new(samples: Vec<T>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: u32) -> Self {
        Self {
            samples: vec![T::zero(); len],
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn peak(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |m, s| m.max(s.abs()))
    }

    pub fn cast<U: Real>(&self) -> Waveform<U> {
        Waveform {
            samples: self
                .samples
                .iter()
                .map(|s| U::of(s.to_f64_lossy()))
                .collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}
