use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::conditioning::{assemble, to_matrix, FeatureLayout, FrameAnalysis};
use crate::error::{Error, Result};
use crate::features::{
    compute_tfte, decompose_sew_rew, estimate_f0, F0Config, ProsodyFrame, DEFAULT_SEW_CUTOFF_HZ,
    DEFAULT_TFTE_BINS, REW_DIM, SEW_DIM,
};
use crate::lp::{
    analysis_filter, autocorrelate, bandwidth_expand, levinson_durbin, lpc_to_lsf, lsf_to_lpc,
    FilterSchedule, LpcCoefficients, LsfVector, DEFAULT_BANDWIDTH_GAMMA, DEFAULT_ORDER,
};
use crate::signal::{FrameGrid, Waveform, Window, DEFAULT_SAMPLE_RATE_HZ};

/// Framing, LP and feature settings shared by analysis and synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub sample_rate_hz: u32,
    pub frame_ms: f64,
    pub shift_ms: f64,
    pub lp_order: usize,
    pub bandwidth_gamma: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
    pub tfte_bins: usize,
    pub sew_dim: usize,
    pub rew_dim: usize,
    pub sew_cutoff_hz: f64,
    pub mu: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let f0 = F0Config::default();
        Self {
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            frame_ms: 20.0,
            shift_ms: 5.0,
            lp_order: DEFAULT_ORDER,
            bandwidth_gamma: DEFAULT_BANDWIDTH_GAMMA,
            f0_min_hz: f0.min_hz,
            f0_max_hz: f0.max_hz,
            voicing_threshold: f0.voicing_threshold,
            tfte_bins: DEFAULT_TFTE_BINS,
            sew_dim: SEW_DIM,
            rew_dim: REW_DIM,
            sew_cutoff_hz: DEFAULT_SEW_CUTOFF_HZ,
            mu: 255,
        }
    }
}

impl AnalysisConfig {
    pub fn layout(&self) -> FeatureLayout {
        FeatureLayout {
            lsf_dim: self.lp_order,
            sew_dim: self.sew_dim,
            rew_dim: self.rew_dim,
        }
    }

    pub fn f0_config(&self) -> F0Config {
        F0Config {
            min_hz: self.f0_min_hz,
            max_hz: self.f0_max_hz,
            voicing_threshold: self.voicing_threshold,
        }
    }

    /// Grid covering `num_samples` at the configured rate.
    pub fn grid(&self, num_samples: usize) -> Result<FrameGrid> {
        FrameGrid::from_ms(self.sample_rate_hz, self.frame_ms, self.shift_ms, num_samples)
    }

    pub fn shift_samples(&self) -> Result<usize> {
        Ok(self.grid(0)?.shift)
    }

    pub fn check_rate(&self, wave: &Waveform<f64>) -> Result<()> {
        if wave.sample_rate_hz != self.sample_rate_hz {
            return Err(Error::InvalidArgument(format!(
                "waveform is {} Hz but analysis expects {} Hz (no resampling is done)",
                wave.sample_rate_hz, self.sample_rate_hz
            )));
        }
        Ok(())
    }
}

/// Everything extracted from one utterance.
#[derive(Debug, Clone)]
pub struct UtteranceAnalysis {
    pub grid: FrameGrid,
    /// Per-frame LSFs as stored (rounded to `f32`).
    pub lsf: Vec<LsfVector<f64>>,
    /// Filters rebuilt from the stored LSFs; the excitation is computed with
    /// these so synthesis from the feature file inverts it exactly.
    pub lpc: Vec<LpcCoefficients<f64>>,
    pub excitation: Vec<f64>,
    pub prosody: Vec<ProsodyFrame<f64>>,
    /// Unnormalized `frames × dim` auxiliary features.
    pub features: Array2<f64>,
}

impl UtteranceAnalysis {
    pub fn schedule(&self) -> FilterSchedule<'_, f64> {
        FilterSchedule::new(&self.lpc, &self.grid)
    }
}

/// Rounds LSFs to `f32`, nudging any pair that collapses so the vector
/// stays strictly increasing.
pub fn quantize_lsf(lsf: &LsfVector<f64>) -> Result<LsfVector<f64>> {
    let mut prev = f32::NEG_INFINITY;
    let freqs = lsf
        .frequencies
        .iter()
        .map(|&w| {
            let mut v = w as f32;
            if v <= prev {
                v = prev.next_up();
            }
            prev = v;
            v as f64
        })
        .collect();
    LsfVector::new(freqs)
}

/// Bandwidth-expanded LPC of one Hann-windowed frame.
pub fn frame_lpc(frame: &[f64], order: usize, gamma: f64) -> Result<LpcCoefficients<f64>> {
    let r = autocorrelate(frame, order)?;
    let fit = levinson_durbin(&r, order)?;
    bandwidth_expand(&fit.lpc, gamma)
}

/// Per-frame envelope of a waveform as stored LSFs and their filters.
pub fn envelope(
    samples: &[f64],
    grid: &FrameGrid,
    config: &AnalysisConfig,
) -> Result<(Vec<LsfVector<f64>>, Vec<LpcCoefficients<f64>>)> {
    let window = Window::Hann.coefficients::<f64>(grid.frame_len);
    let mut frame = vec![0.0; grid.frame_len];
    let mut lsfs = Vec::with_capacity(grid.num_frames);
    let mut lpcs = Vec::with_capacity(grid.num_frames);
    for k in 0..grid.num_frames {
        grid.fill_frame(samples, k, &mut frame);
        frame.iter_mut().zip(&window).for_each(|(x, w)| *x *= w);
        let lpc = frame_lpc(&frame, config.lp_order, config.bandwidth_gamma)?;
        let lsf = quantize_lsf(&lpc_to_lsf(&lpc)?)?;
        lpcs.push(lsf_to_lpc(&lsf)?);
        lsfs.push(lsf);
    }
    Ok((lsfs, lpcs))
}

/// LP analysis, excitation, prosody and SEW/REW for one utterance.
pub fn analyze_utterance(wave: &Waveform<f64>, config: &AnalysisConfig) -> Result<UtteranceAnalysis> {
    config.check_rate(wave)?;
    if wave.is_empty() {
        return Err(Error::Empty("waveform"));
    }
    let grid = config.grid(wave.len())?;
    let (lsf, lpc) = envelope(&wave.samples, &grid, config)?;
    let excitation = analysis_filter(&wave.samples, FilterSchedule::new(&lpc, &grid))?;
    let prosody = estimate_f0(&excitation, &grid, config.sample_rate_hz, &config.f0_config());
    let tfte = compute_tfte(&excitation, &grid, config.sample_rate_hz, config.tfte_bins)?;
    let sew_rew = decompose_sew_rew(
        &tfte,
        config.sew_cutoff_hz,
        grid.frame_rate_hz(config.sample_rate_hz),
        config.sew_dim,
        config.rew_dim,
    )?;
    let frames: Vec<FrameAnalysis<f64>> = lsf
        .iter()
        .zip(&prosody)
        .map(|(l, p)| FrameAnalysis {
            lsf: l.clone(),
            prosody: *p,
        })
        .collect();
    let features = to_matrix(&assemble(&frames, &sew_rew.frames)?)?;
    Ok(UtteranceAnalysis {
        grid,
        lsf,
        lpc,
        excitation,
        prosody,
        features,
    })
}

/// Filters rebuilt from the LSF columns of a feature matrix.
pub fn lpc_from_features(features: &Array2<f64>, layout: &FeatureLayout) -> Result<Vec<LpcCoefficients<f64>>> {
    if features.ncols() != layout.dim() {
        return Err(Error::Shape(format!(
            "{} feature columns, layout has {}",
            features.ncols(),
            layout.dim()
        )));
    }
    features
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let lsf = LsfVector::new(row.iter().take(layout.lsf_dim).copied().collect())?;
            let lpc = lsf_to_lpc(&lsf)?;
            if !lpc.is_stable() {
                return Err(Error::Unstable { frame: k });
            }
            Ok(lpc)
        })
        .collect()
}
