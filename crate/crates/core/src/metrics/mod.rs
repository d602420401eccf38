//! Objective evaluation: log-spectral distance overall and per voicing
//! region, and F0 error on frames voiced in both signals.

mod report;

pub use report::{aggregate, evaluate, render_table, EvalConfig, EvalReport};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::features::ProsodyFrame;
use crate::scalar::Real;
use crate::signal::{FrameGrid, Window};

pub const DEFAULT_LSD_FFT_SIZE: usize = 1024;
pub const DEFAULT_LSD_FRAME_MS: f64 = 20.0;
pub const LSD_EPSILON: f64 = 1e-10;

/// Common length of two signals, rejecting a mismatch longer than a frame.
pub fn common_length(reference: usize, test: usize, frame_len: usize) -> Result<usize> {
    if reference.abs_diff(test) > frame_len {
        return Err(Error::Shape(format!(
            "reference has {reference} samples and test {test}; more than one frame apart"
        )));
    }
    Ok(reference.min(test))
}

/// `20 log10(|S| + eps)` of every frame, `fft_size / 2 + 1` bins per frame.
pub fn log_spectra<T: Real>(samples: &[T], grid: &FrameGrid, fft_size: usize) -> Result<Vec<Vec<f64>>> {
    if fft_size < grid.frame_len {
        return Err(Error::InvalidArgument(format!(
            "fft size {fft_size} is shorter than the {}-sample frame",
            grid.frame_len
        )));
    }
    let x: Vec<f64> = samples.iter().map(|v| v.to_f64_lossy()).collect();
    let window = Window::Hann.coefficients::<f64>(grid.frame_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_size);
    let mut frame = vec![0.0; grid.frame_len];
    let mut buf = vec![Complex::new(0.0, 0.0); fft_size];
    Ok((0..grid.num_frames)
        .map(|k| {
            grid.fill_frame(&x, k, &mut frame);
            buf.fill(Complex::new(0.0, 0.0));
            for (c, (v, w)) in buf.iter_mut().zip(frame.iter().zip(&window)) {
                c.re = v * w;
            }
            fft.process(&mut buf);
            buf[..fft_size / 2 + 1]
                .iter()
                .map(|c| 20.0 * (c.norm() + LSD_EPSILON).log10())
                .collect()
        })
        .collect())
}

/// RMS difference of two log spectra in dB.
pub fn spectral_distance(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (sum / a.len() as f64).sqrt()
}

/// Per-frame log-spectral distance over the frames of `grid` that start
/// inside the common length.
pub fn frame_lsd<T: Real>(reference: &[T], test: &[T], grid: &FrameGrid, fft_size: usize) -> Result<Vec<f64>> {
    let n = common_length(reference.len(), test.len(), grid.frame_len)?;
    if n == 0 {
        return Err(Error::Empty("signals to compare"));
    }
    let grid = grid.with_num_frames(grid.num_frames.min(n.div_ceil(grid.shift)));
    let a = log_spectra(&reference[..n], &grid, fft_size)?;
    let b = log_spectra(&test[..n], &grid, fft_size)?;
    Ok(a.iter().zip(&b).map(|(x, y)| spectral_distance(x, y)).collect())
}

/// Mean log-spectral distance in dB.
pub fn lsd<T: Real>(reference: &[T], test: &[T], grid: &FrameGrid, fft_size: usize) -> Result<f64> {
    let d = frame_lsd(reference, test, grid, fft_size)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Frames whose voicing differs from either neighbour.
pub fn transition_frames(voicing: &[bool]) -> Vec<bool> {
    (0..voicing.len())
        .map(|i| {
            (i > 0 && voicing[i - 1] != voicing[i])
                || (i + 1 < voicing.len() && voicing[i + 1] != voicing[i])
        })
        .collect()
}

/// Membership of the unvoiced-or-transition region; its complement is the
/// steady voiced region.
pub fn uv_transition_frames(voicing: &[bool]) -> Vec<bool> {
    transition_frames(voicing)
        .into_iter()
        .zip(voicing)
        .map(|(t, &v)| t || !v)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionLsd {
    /// Absent when the region is empty.
    pub voiced_db: Option<f64>,
    pub uv_transition_db: Option<f64>,
    pub voiced_frames: usize,
    pub uv_transition_frames: usize,
}

fn mean_of(values: impl Iterator<Item = f64>) -> (Option<f64>, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    ((n > 0).then(|| sum / n as f64), n)
}

/// Splits per-frame distances into steady-voiced and unvoiced/transition sets.
pub fn region_lsd(frame_distances: &[f64], voicing: &[bool]) -> Result<RegionLsd> {
    if frame_distances.len() != voicing.len() {
        return Err(Error::Shape(format!(
            "{} distance frames but {} voicing flags",
            frame_distances.len(),
            voicing.len()
        )));
    }
    let uvt = uv_transition_frames(voicing);
    let (voiced_db, voiced_frames) =
        mean_of(frame_distances.iter().zip(&uvt).filter(|(_, &u)| !u).map(|(d, _)| *d));
    let (uv_transition_db, uv_transition_frames) =
        mean_of(frame_distances.iter().zip(&uvt).filter(|(_, &u)| u).map(|(d, _)| *d));
    Ok(RegionLsd {
        voiced_db,
        uv_transition_db,
        voiced_frames,
        uv_transition_frames,
    })
}

/// Log-spectral distance restricted to each voicing region.
pub fn lsd_by_region<T: Real>(
    reference: &[T],
    test: &[T],
    grid: &FrameGrid,
    fft_size: usize,
    prosody: &[ProsodyFrame<T>],
) -> Result<RegionLsd> {
    let d = frame_lsd(reference, test, grid, fft_size)?;
    let voicing: Vec<bool> = prosody.iter().map(|p| p.voiced).collect();
    region_lsd(&d, &voicing)
}

/// F0 RMSE in Hz over frames voiced in both inputs, with the frame count.
/// `None` when no frame is voiced in both.
pub fn f0_rmse<T: Real>(
    reference: &[ProsodyFrame<T>],
    test: &[ProsodyFrame<T>],
) -> Result<(Option<f64>, usize)> {
    if reference.len() != test.len() {
        return Err(Error::Shape(format!(
            "{} reference frames but {} test frames",
            reference.len(),
            test.len()
        )));
    }
    let (sum, n) = reference
        .iter()
        .zip(test)
        .filter(|(a, b)| a.voiced && b.voiced)
        .fold((0.0, 0usize), |(s, n), (a, b)| {
            (s + (a.f0_hz.to_f64_lossy() - b.f0_hz.to_f64_lossy()).powi(2), n + 1)
        });
    Ok(((n > 0).then(|| (sum / n as f64).sqrt()), n))
}
