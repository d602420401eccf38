use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Waveform;

/// Frame layout over a signal: frame `k` covers `[k * shift, k * shift + frame_len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGrid {
    pub frame_len: usize,
    pub shift: usize,
    pub num_frames: usize,
}

impl FrameGrid {
    pub fn new(frame_len: usize, shift: usize, num_samples: usize) -> Result<Self> {
        if frame_len == 0 || shift == 0 {
            return Err(Error::InvalidArgument(
                "frame length and shift must be positive".into(),
            ));
        }
        Ok(Self {
            frame_len,
            shift,
            num_frames: num_samples.div_ceil(shift),
        })
    }

    /// Grid from millisecond durations (20 ms / 5 ms by default).
    pub fn from_ms(
        sample_rate_hz: u32,
        frame_ms: f64,
        shift_ms: f64,
        num_samples: usize,
    ) -> Result<Self> {
        let to_samples = |ms: f64| (sample_rate_hz as f64 * ms / 1000.0).round() as usize;
        Self::new(to_samples(frame_ms), to_samples(shift_ms), num_samples)
    }

    pub fn with_num_frames(self, num_frames: usize) -> Self {
        Self { num_frames, ..self }
    }

    pub fn frame_start(&self, k: usize) -> usize {
        k * self.shift
    }

    /// Frame index owning sample `t` under the hold convention `floor(t / shift)`,
    /// clamped to the last frame.
    pub fn frame_of_sample(&self, t: usize) -> usize {
        (t / self.shift).min(self.num_frames.saturating_sub(1))
    }

    /// Copies frame `k` of `samples` into `out`, zero-padding past the end.
    pub fn fill_frame<T: Real>(&self, samples: &[T], k: usize, out: &mut [T]) {
        let start = self.frame_start(k);
        for (i, o) in out.iter_mut().enumerate() {
            *o = samples.get(start + i).copied().unwrap_or_else(T::zero);
        }
    }

    /// Frame frame rate in Hz.
    pub fn frame_rate_hz(&self, sample_rate_hz: u32) -> f64 {
        sample_rate_hz as f64 / self.shift as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients<T: Real>(self, n: usize) -> Vec<T> {
        match self {
            Window::Rectangular => vec![T::one(); n],
            Window::Hann => (0..n)
                .map(|i| {
                    let phase = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    T::of(0.5 - 0.5 * phase.cos())
                })
                .collect(),
        }
    }
}

/// Slices the waveform into windowed, zero-padded frames.
pub fn frame_signal<T: Real>(
    waveform: &Waveform<T>,
    grid: &FrameGrid,
    window: Window,
) -> Result<Vec<Vec<T>>> {
    if waveform.is_empty() {
        return Err(Error::Empty("waveform"));
    }
    let w = window.coefficients::<T>(grid.frame_len);
    Ok((0..grid.num_frames)
        .map(|k| {
            let mut frame = vec![T::zero(); grid.frame_len];
            grid.fill_frame(&waveform.samples, k, &mut frame);
            frame.iter_mut().zip(&w).for_each(|(x, &c)| *x = *x * c);
            frame
        })
        .collect())
}
