use serde::{Deserialize, Serialize};

use super::analysis::{lpc_from_features, AnalysisConfig};
use super::target::{reconstruct, NoiseShapingFilter, VariantTag};
use crate::conditioning::{ConditioningMatrix, FeatureFile, NormStats};
use crate::error::{Error, Result};
use crate::lp::FilterSchedule;
use crate::nn::{generate, Checkpoint, GenerationMode, WaveNet};
use crate::signal::{SymbolSequence, Waveform};

/// Peak-to-RMS ratio assumed when a residual gain has to be estimated from
/// the frame energies alone.
pub const FALLBACK_CREST_FACTOR: f64 = 4.0;

/// Vocoder metadata stored in the checkpoint header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMeta {
    pub variant: VariantTag,
    pub analysis: AnalysisConfig,
    pub norm: NormStats,
    pub noise_shaping: Option<NoiseShapingFilter>,
    /// SEW and REW columns are zeroed after normalization.
    pub zero_sew_rew: bool,
}

impl ModelMeta {
    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        Ok(serde_json::from_value(ck.extra.clone())?)
    }

    /// Normalized, upsampled conditioning for `num_samples` samples.
    pub fn condition(&self, features: &FeatureFile, num_samples: usize) -> Result<ConditioningMatrix<f32>> {
        let layout = self.analysis.layout();
        if self.norm.layout != layout.describe() {
            return Err(Error::Shape(format!(
                "statistics are for {} but analysis produces {}",
                self.norm.layout,
                layout.describe()
            )));
        }
        let rows = features.rows.mapv(f64::from);
        let grid = self.analysis.grid(num_samples)?;
        if rows.nrows() != grid.num_frames {
            return Err(Error::Shape(format!(
                "{} feature frames for {num_samples} samples ({} expected)",
                rows.nrows(),
                grid.num_frames
            )));
        }
        let normalized = self.norm.normalize(&rows)?;
        let mut cond = ConditioningMatrix::upsample(&normalized, &grid, num_samples)?;
        if self.zero_sew_rew {
            cond.zero_columns(layout.sew_range().start..layout.rew_range().end);
        }
        Ok(cond.cast())
    }

    /// Stored target gain, or an estimate from the frame energies.
    pub fn gain(&self, features: &FeatureFile) -> f32 {
        let slot = self.variant.gain_slot();
        if let Some(&g) = features.gains.get(slot) {
            return g;
        }
        if self.variant == VariantTag::Wn {
            return 1.0;
        }
        let gi = self.analysis.layout().gain_index();
        let rms = features
            .rows
            .column(gi)
            .iter()
            .fold(0.0f64, |m, &db| m.max(10f64.powf(db as f64 / 20.0)));
        log::warn!("feature file has no stored gain; estimating from frame energies");
        (FALLBACK_CREST_FACTOR * rms) as f32
    }
}

/// Trained network plus everything needed to turn its output into speech.
#[derive(Debug, Clone)]
pub struct VocoderModel {
    pub net: WaveNet<f32>,
    pub meta: ModelMeta,
    pub step: u64,
}

impl VocoderModel {
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        Ok(Self {
            net: WaveNet::new(ck.config.clone(), ck.params.clone())?,
            meta: ModelMeta::from_checkpoint(ck)?,
            step: ck.step,
        })
    }

    fn check_variant(&self, requested: VariantTag) -> Result<()> {
        if requested != self.meta.variant {
            return Err(Error::VariantMismatch {
                checkpoint: self.meta.variant.to_string(),
                requested: requested.to_string(),
            });
        }
        Ok(())
    }

    /// Output length: one shift per feature frame.
    pub fn output_len(&self, features: &FeatureFile) -> Result<usize> {
        Ok(features.rows.nrows() * self.meta.analysis.shift_samples()?)
    }

    /// Turns network symbols into speech through the variant's
    /// reconstruction path.
    pub fn reconstruct(&self, symbols: &SymbolSequence, features: &FeatureFile) -> Result<Vec<f64>> {
        let n = symbols.0.len();
        let grid = self.meta.analysis.grid(n)?;
        let lpc = match self.meta.variant {
            VariantTag::ExcitNet => {
                let rows = features.rows.mapv(f64::from);
                Some(lpc_from_features(&rows, &self.meta.analysis.layout())?)
            }
            _ => None,
        };
        let schedule = lpc.as_deref().map(|l| FilterSchedule::new(l, &grid));
        reconstruct(
            symbols,
            self.meta.variant,
            self.gain(features),
            schedule,
            self.meta.noise_shaping.as_ref(),
            self.meta.analysis.mu,
        )
    }

    pub fn gain(&self, features: &FeatureFile) -> f32 {
        self.meta.gain(features)
    }

    /// Generates speech from one utterance's features.
    pub fn synthesize(
        &self,
        requested: VariantTag,
        features: &FeatureFile,
        seed: u64,
        mode: GenerationMode,
    ) -> Result<Waveform<f64>> {
        self.check_variant(requested)?;
        let n = self.output_len(features)?;
        let cond = self.meta.condition(features, n)?;
        let symbols = generate(&self.net, &cond, mode, seed)?;
        let samples = self.reconstruct(&symbols, features)?;
        Waveform::new(samples, self.meta.analysis.sample_rate_hz)
    }
}
