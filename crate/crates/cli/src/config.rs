use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use excitvoc::metrics::EvalConfig;
use excitvoc::nn::{NetConfig, TrainConfig};
use excitvoc::vocoder::AnalysisConfig;

/// Everything a run needs, loaded from one TOML file. Missing keys take
/// their defaults; unknown keys are an error.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seeds weight initialization, batch sampling and generation.
    pub seed: u64,
    pub analysis: AnalysisConfig,
    pub net: NetSection,
    pub train: TrainSection,
    pub eval: EvalConfig,
    pub paths: PathsSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Paper,
    Desk,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetSection {
    pub preset: Preset,
    /// Zero the SEW and REW conditioning columns (ablation).
    pub zero_sew_rew: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size_samples: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_steps: u64,
    pub eval_interval: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            batch_size_samples: t.batch_size_samples,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            max_steps: t.max_steps,
            eval_interval: t.eval_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub features_dir: PathBuf,
    pub checkpoint_dir: PathBuf,
    pub synth_dir: PathBuf,
    pub report: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            features_dir: "features".into(),
            checkpoint_dir: "checkpoints".into(),
            synth_dir: "synth".into(),
            report: "report.json".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eval.fft_size == 0 {
            bail!("eval.fft_size must be positive");
        }
        self.train_config().validate(&self.net_config())?;
        Ok(())
    }

    pub fn net_config(&self) -> NetConfig {
        let base = match self.net.preset {
            Preset::Paper => NetConfig::paper(),
            Preset::Desk => NetConfig::desk(),
        };
        NetConfig {
            condition_dim: self.analysis.layout().dim(),
            ..base
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            learning_rate: t.learning_rate,
            batch_size_samples: t.batch_size_samples,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            max_steps: t.max_steps,
            seed: self.seed,
            eval_interval: t.eval_interval,
        }
    }
}
