use ndarray::{Array2, Axis};
use rustfft::{num_complex::Complex, FftPlanner};

use super::dct::{dct_ii, dct_iii};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{FrameGrid, Window};

/// Excitation spectral trajectory: `num_frames × num_bins`, non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TfteMatrix<T> {
    pub values: Array2<T>,
}

impl<T: Real> TfteMatrix<T> {
    pub fn num_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SewRewFrame<T> {
    pub sew: Vec<T>,
    pub rew: Vec<T>,
}

/// Full-resolution tracks plus the band-reduced per-frame coefficients.
/// `sew_track + rew_track == tfte` holds element-wise.
#[derive(Debug, Clone)]
pub struct SewRewDecomposition<T> {
    pub sew_track: Array2<T>,
    pub rew_track: Array2<T>,
    pub frames: Vec<SewRewFrame<T>>,
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel bands over `[0, sr/2]`, each normalized to unit weight.
/// A band narrower than the FFT bin spacing falls back to linear
/// interpolation at its centre frequency.
fn mel_bands(num_bins: usize, nfft: usize, sample_rate_hz: u32) -> Vec<Vec<(usize, f64)>> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..num_bins + 2)
        .map(|i| mel_to_hz(top * i as f64 / (num_bins + 1) as f64))
        .collect();
    let bin_hz = sample_rate_hz as f64 / nfft as f64;
    let half = nfft / 2;
    (0..num_bins)
        .map(|b| {
            let (lo, mid, hi) = (edges[b], edges[b + 1], edges[b + 2]);
            let mut weights: Vec<(usize, f64)> = (0..=half)
                .filter_map(|k| {
                    let f = k as f64 * bin_hz;
                    let w = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    (w > 0.0).then_some((k, w))
                })
                .collect();
            let total: f64 = weights.iter().map(|(_, w)| w).sum();
            if total <= 1e-9 {
                let pos = (mid / bin_hz).min(half as f64);
                let k0 = (pos.floor() as usize).min(half);
                let k1 = (k0 + 1).min(half);
                let frac = pos - k0 as f64;
                weights = vec![(k0, 1.0 - frac), (k1, frac)];
            } else {
                weights.iter_mut().for_each(|(_, w)| *w /= total);
            }
            weights
        })
        .collect()
}

/// Per-frame Hann-windowed magnitude spectrum of the excitation, pooled into
/// `num_bins` mel-spaced bands.
pub fn compute_tfte<T: Real>(
    excitation: &[T],
    grid: &FrameGrid,
    sample_rate_hz: u32,
    num_bins: usize,
) -> Result<TfteMatrix<T>> {
    if num_bins == 0 {
        return Err(Error::InvalidArgument("tfte needs at least one band".into()));
    }
    let nfft = grid.frame_len.next_power_of_two();
    let bands = mel_bands(num_bins, nfft, sample_rate_hz);
    let window = Window::Hann.coefficients::<T>(grid.frame_len);
    let fft = FftPlanner::<T>::new().plan_fft_forward(nfft);
    let mut frame = vec![T::zero(); grid.frame_len];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nfft];
    let mut values = Array2::zeros((grid.num_frames, num_bins));
    for (k, mut row) in values.axis_iter_mut(Axis(0)).enumerate() {
        grid.fill_frame(excitation, k, &mut frame);
        buf.iter_mut().for_each(|c| *c = Complex::new(T::zero(), T::zero()));
        for (c, (&x, &w)) in buf.iter_mut().zip(frame.iter().zip(&window)) {
            c.re = x * w;
        }
        fft.process(&mut buf);
        for (out, band) in row.iter_mut().zip(&bands) {
            *out = band
                .iter()
                .fold(T::zero(), |acc, &(i, w)| acc + buf[i].norm() * T::of(w));
        }
    }
    Ok(TfteMatrix { values })
}

/// Half width `h` of the `2h + 1` tap moving average whose first spectral
/// null sits near `cutoff_hz`.
pub fn moving_average_half_width(cutoff_hz: f64, frame_rate_hz: f64) -> usize {
    ((frame_rate_hz / (2.0 * cutoff_hz)).floor() as usize).max(1)
}

/// Splits each band trajectory into a slowly evolving part (zero-phase moving
/// average over time) and the rapidly evolving remainder, then keeps the
/// first `sew_dim` / `rew_dim` band-DCT coefficients of each.
///
/// Near the ends the window shrinks symmetrically, so a constant trajectory
/// always passes unchanged.
pub fn decompose_sew_rew<T: Real>(
    tfte: &TfteMatrix<T>,
    cutoff_hz: f64,
    frame_rate_hz: f64,
    sew_dim: usize,
    rew_dim: usize,
) -> Result<SewRewDecomposition<T>> {
    if !(cutoff_hz > 0.0 && cutoff_hz < frame_rate_hz / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            frame_rate_hz / 2.0
        )));
    }
    if tfte.num_bins() < sew_dim + rew_dim {
        return Err(Error::InvalidArgument(format!(
            "{} bands cannot carry {sew_dim} + {rew_dim} coefficients",
            tfte.num_bins()
        )));
    }
    let h = moving_average_half_width(cutoff_hz, frame_rate_hz);
    let n = tfte.num_frames();
    let mut sew_track = Array2::zeros(tfte.values.raw_dim());
    for t in 0..n {
        let w = h.min(t).min(n - 1 - t);
        let span = tfte.values.slice(ndarray::s![t - w..=t + w, ..]);
        let mean = span.sum_axis(Axis(0)) / T::of_usize(2 * w + 1);
        sew_track.row_mut(t).assign(&mean);
    }
    let rew_track = &tfte.values - &sew_track;
    let frames = sew_track
        .axis_iter(Axis(0))
        .zip(rew_track.axis_iter(Axis(0)))
        .map(|(s, r)| SewRewFrame {
            sew: dct_ii(&s.to_vec(), sew_dim),
            rew: dct_ii(&r.to_vec(), rew_dim),
        })
        .collect();
    Ok(SewRewDecomposition {
        sew_track,
        rew_track,
        frames,
    })
}

impl<T: Real> SewRewFrame<T> {
    /// Band-domain reconstruction from the truncated coefficients.
    pub fn reconstruct(&self, num_bins: usize) -> Vec<T> {
        dct_iii(&self.sew, num_bins)
            .into_iter()
            .zip(dct_iii(&self.rew, num_bins))
            .map(|(a, b)| a + b)
            .collect()
    }
}
