use serde::{Deserialize, Serialize};

use super::analysis::AnalysisConfig;
use crate::error::{Error, Result};
use crate::lp::{
    analysis_filter, autocorrelate, levinson_durbin, synthesis_filter, FilterSchedule,
    LpcCoefficients,
};
use crate::signal::{mu_law_decode, mu_law_encode, FrameGrid, SymbolSequence, Waveform, Window};

/// Which signal the network models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariantTag {
    /// Speech waveform.
    #[serde(rename = "WN")]
    Wn,
    /// Speech whitened by a fixed corpus-average filter.
    #[serde(rename = "WN_NS")]
    WnNs,
    /// Time-varying LP residual.
    #[serde(rename = "EXCITNET")]
    ExcitNet,
}

impl VariantTag {
    pub const ALL: [VariantTag; 3] = [VariantTag::Wn, VariantTag::WnNs, VariantTag::ExcitNet];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantTag::Wn => "WN",
            VariantTag::WnNs => "WN_NS",
            VariantTag::ExcitNet => "EXCITNET",
        }
    }

    /// Position of this variant's gain in the feature-file trailer.
    pub fn gain_slot(self) -> usize {
        match self {
            VariantTag::Wn => 0,
            VariantTag::WnNs => 1,
            VariantTag::ExcitNet => 2,
        }
    }
}

impl std::fmt::Display for VariantTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VariantTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "WN" => Ok(VariantTag::Wn),
            "WN_NS" => Ok(VariantTag::WnNs),
            "EXCITNET" => Ok(VariantTag::ExcitNet),
            _ => Err(Error::InvalidArgument(format!(
                "unknown variant {s:?} (expected WN, WN_NS or EXCITNET)"
            ))),
        }
    }
}

/// Time-invariant all-pole filter fitted to the corpus-average spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseShapingFilter {
    pub coeffs: Vec<f64>,
}

impl NoiseShapingFilter {
    pub fn lpc(&self) -> LpcCoefficients<f64> {
        LpcCoefficients::new(self.coeffs.clone())
    }

    fn with_schedule<R>(&self, n: usize, f: impl FnOnce(FilterSchedule<'_, f64>) -> R) -> R {
        let len = n.max(1);
        let grid = FrameGrid::new(len, len, len).expect("positive length");
        let frames = [self.lpc()];
        f(FilterSchedule::new(&frames, &grid))
    }

    /// `A(z) x`.
    pub fn whiten(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.with_schedule(samples.len(), |s| analysis_filter(samples, s))
    }

    /// `e / A(z)`.
    pub fn color(&self, residual: &[f64]) -> Result<Vec<f64>> {
        self.with_schedule(residual.len(), |s| synthesis_filter(residual, s))
    }
}

/// Sums Hann-windowed frame autocorrelations of one waveform; returns the
/// sum and the frame count.
pub fn autocorrelation_sum(wave: &Waveform<f64>, config: &AnalysisConfig) -> Result<(Vec<f64>, usize)> {
    let grid = config.grid(wave.len())?;
    let window = Window::Hann.coefficients::<f64>(grid.frame_len);
    let mut frame = vec![0.0; grid.frame_len];
    let mut sum = vec![0.0; config.lp_order + 1];
    for k in 0..grid.num_frames {
        grid.fill_frame(&wave.samples, k, &mut frame);
        frame.iter_mut().zip(&window).for_each(|(x, w)| *x *= w);
        for (s, r) in sum.iter_mut().zip(autocorrelate(&frame, config.lp_order)?) {
            *s += r;
        }
    }
    Ok((sum, grid.num_frames))
}

/// Averages frame autocorrelations over the whole corpus and fits one
/// all-pole filter of the configured order.
pub fn fit_noise_shaping_filter<'a>(
    corpus: impl IntoIterator<Item = &'a Waveform<f64>>,
    config: &AnalysisConfig,
) -> Result<NoiseShapingFilter> {
    let mut total = vec![0.0; config.lp_order + 1];
    let mut frames = 0usize;
    for wave in corpus {
        let (sum, n) = autocorrelation_sum(wave, config)?;
        total.iter_mut().zip(sum).for_each(|(t, s)| *t += s);
        frames += n;
    }
    noise_shaping_from_sums(&total, frames, config.lp_order)
}

pub fn noise_shaping_from_sums(sum: &[f64], frames: usize, order: usize) -> Result<NoiseShapingFilter> {
    if frames == 0 {
        return Err(Error::Empty("noise-shaping corpus"));
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / frames as f64).collect();
    let fit = levinson_durbin(&mean, order)?;
    Ok(NoiseShapingFilter {
        coeffs: fit.lpc.coeffs,
    })
}

/// Signal before gain normalization and companding.
pub fn target_signal(
    wave: &[f64],
    variant: VariantTag,
    lpc: Option<FilterSchedule<'_, f64>>,
    nsf: Option<&NoiseShapingFilter>,
) -> Result<Vec<f64>> {
    match variant {
        VariantTag::Wn => Ok(wave.to_vec()),
        VariantTag::WnNs => nsf
            .ok_or_else(|| Error::InvalidArgument("WN_NS needs a noise-shaping filter".into()))?
            .whiten(wave),
        VariantTag::ExcitNet => analysis_filter(
            wave,
            lpc.ok_or_else(|| Error::InvalidArgument("EXCITNET needs LP analysis".into()))?,
        ),
    }
}

/// Peak magnitude used to scale a residual target into [-1, 1], rounded to
/// `f32` as stored. The speech target is not rescaled.
pub fn target_gain(variant: VariantTag, signal: &[f64]) -> Result<f32> {
    if variant == VariantTag::Wn {
        return Ok(1.0);
    }
    let g = signal.iter().fold(0.0f64, |m, v| m.max(v.abs())) as f32;
    if g == 0.0 {
        return Err(Error::SilentUtterance);
    }
    Ok(g)
}

/// mu-law symbols of the variant's target and the gain that undoes the
/// scaling. `gain` overrides the utterance peak (e.g. the stored value).
pub fn prepare_target(
    wave: &[f64],
    variant: VariantTag,
    lpc: Option<FilterSchedule<'_, f64>>,
    nsf: Option<&NoiseShapingFilter>,
    gain: Option<f32>,
    mu: u32,
) -> Result<(SymbolSequence, f32)> {
    let signal = target_signal(wave, variant, lpc, nsf)?;
    let g = match gain {
        Some(g) if g > 0.0 => g,
        Some(_) => return Err(Error::SilentUtterance),
        None => target_gain(variant, &signal)?,
    };
    let scaled: Vec<f64> = signal.iter().map(|v| v / g as f64).collect();
    Ok((mu_law_encode(&scaled, mu)?, g))
}

/// Decodes symbols, restores the gain and runs the variant's
/// reconstruction filter.
pub fn reconstruct(
    symbols: &SymbolSequence,
    variant: VariantTag,
    gain: f32,
    lpc: Option<FilterSchedule<'_, f64>>,
    nsf: Option<&NoiseShapingFilter>,
    mu: u32,
) -> Result<Vec<f64>> {
    let decoded: Vec<f64> = mu_law_decode(symbols, mu)?;
    let scaled: Vec<f64> = decoded.iter().map(|v| v * gain as f64).collect();
    match variant {
        VariantTag::Wn => Ok(scaled),
        VariantTag::WnNs => nsf
            .ok_or_else(|| Error::InvalidArgument("WN_NS needs a noise-shaping filter".into()))?
            .color(&scaled),
        VariantTag::ExcitNet => synthesis_filter(
            &scaled,
            lpc.ok_or_else(|| Error::InvalidArgument("EXCITNET needs LP filters".into()))?,
        ),
    }
}

/// Signal-to-noise ratio of `test` against `reference` in dB over the
/// common length.
pub fn snr_db(reference: &[f64], test: &[f64]) -> f64 {
    let n = reference.len().min(test.len());
    let signal: f64 = reference[..n].iter().map(|v| v * v).sum();
    let noise: f64 = reference[..n]
        .iter()
        .zip(&test[..n])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    10.0 * (signal / noise.max(f64::MIN_POSITIVE)).log10()
}
