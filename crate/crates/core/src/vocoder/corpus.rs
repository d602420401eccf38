use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::analysis::{analyze_utterance, AnalysisConfig};
use super::target::{target_gain, target_signal, NoiseShapingFilter, VariantTag};
use crate::conditioning::FeatureFile;
use crate::error::{Error, Result};
use crate::signal::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidArgument(format!(
                "unknown split {s:?} (expected train, dev or test)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path relative to the corpus root.
    pub path: PathBuf,
    pub split: Split,
}

impl ManifestEntry {
    /// File stem used to name derived files.
    pub fn stem(&self) -> String {
        utterance_stem(&self.path)
    }
}

pub fn utterance_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses `relative/path.wav split` lines; blank lines and `#` comments
/// are ignored.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(path), Some(split), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format(format!(
                "manifest line {}: expected `<path> <split>`",
                i + 1
            )));
        };
        out.push(ManifestEntry {
            path: PathBuf::from(path),
            split: split.parse()?,
        });
    }
    if out.is_empty() {
        return Err(Error::Empty("manifest"));
    }
    Ok(out)
}

pub fn format_manifest(entries: &[ManifestEntry]) -> String {
    entries
        .iter()
        .map(|e| format!("{} {}\n", e.path.display(), e.split.as_str()))
        .collect()
}

/// Feature rows plus the target gains of all three variants. The file is
/// the same whichever variant is trained from it.
pub fn utterance_features(
    wave: &Waveform<f64>,
    config: &AnalysisConfig,
    nsf: &NoiseShapingFilter,
) -> Result<FeatureFile> {
    let analysis = analyze_utterance(wave, config)?;
    let mut gains = vec![0.0f32; VariantTag::ALL.len()];
    for v in VariantTag::ALL {
        let signal = target_signal(&wave.samples, v, Some(analysis.schedule()), Some(nsf))?;
        gains[v.gain_slot()] = target_gain(v, &signal)?;
    }
    Ok(FeatureFile {
        rows: analysis.features.mapv(|v| v as f32),
        gains,
    })
}
