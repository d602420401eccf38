use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use ndarray::Array2;
use rayon::prelude::*;

use excitvoc::conditioning::{fit_normalizer, write_feature_file, FeatureFile};
use excitvoc::signal::{read_wav, Waveform};
use excitvoc::vocoder::{
    autocorrelation_sum, format_manifest, noise_shaping_from_sums, parse_manifest, utterance_features,
    AnalysisConfig, ManifestEntry, Split,
};

use crate::{list_files, write_atomic, Common};

pub const STATS_FILE: &str = "stats.json";
pub const NOISE_SHAPING_FILE: &str = "noise_shaping.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const FEATURE_EXT: &str = "excf";

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Directory of WAV files (all used for training) or a manifest of
    /// `path split` lines with paths relative to the manifest.
    pub input: PathBuf,
    /// Output directory; defaults to `paths.features_dir`.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

/// Resolved corpus entries, sorted as listed.
fn corpus_entries(input: &Path) -> Result<Vec<ManifestEntry>> {
    let entries: Vec<ManifestEntry> = if input.is_dir() {
        list_files(input, "wav")?
            .into_iter()
            .map(|path| ManifestEntry {
                path,
                split: Split::Train,
            })
            .collect()
    } else {
        let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        let root = input.parent().unwrap_or(Path::new("."));
        parse_manifest(&text)?
            .into_iter()
            .map(|e| ManifestEntry {
                path: root.join(&e.path),
                split: e.split,
            })
            .collect()
    };
    if entries.is_empty() {
        bail!("no input files in {}", input.display());
    }
    let mut seen = HashSet::new();
    for e in &entries {
        if !seen.insert(e.stem()) {
            bail!("duplicate utterance name {:?}", e.stem());
        }
    }
    Ok(entries)
}

fn load(entry: &ManifestEntry, config: &AnalysisConfig) -> Result<Waveform<f64>> {
    let wave = read_wav::<f64>(&entry.path)?;
    config.check_rate(&wave)?;
    Ok(wave)
}

pub fn run(args: AnalyzeArgs) -> Result<bool> {
    let config = args.common.load()?;
    let analysis = &config.analysis;
    let out = args.out.unwrap_or(config.paths.features_dir.clone());
    let entries = corpus_entries(&args.input)?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let pool = args.common.pool()?;
    log::info!("analyzing {} files into {}", entries.len(), out.display());

    let waves: Vec<Option<Waveform<f64>>> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| match load(e, analysis) {
                Ok(w) => Some(w),
                Err(err) => {
                    log::error!("{}: {err:#}", e.path.display());
                    None
                }
            })
            .collect()
    });

    // Summed in listing order so the filter does not depend on scheduling.
    let train: Vec<&Waveform<f64>> = entries
        .iter()
        .zip(&waves)
        .filter(|(e, _)| e.split == Split::Train)
        .filter_map(|(_, w)| w.as_ref())
        .collect();
    if train.is_empty() {
        bail!("no readable training utterances");
    }
    let sums = pool.install(|| {
        train
            .par_iter()
            .map(|w| autocorrelation_sum(w, analysis))
            .collect::<excitvoc::Result<Vec<_>>>()
    })?;
    let mut total = vec![0.0; analysis.lp_order + 1];
    let mut frames = 0;
    for (sum, n) in sums {
        total.iter_mut().zip(sum).for_each(|(t, s)| *t += s);
        frames += n;
    }
    let nsf = noise_shaping_from_sums(&total, frames, analysis.lp_order)?;

    let features: Vec<Option<FeatureFile>> = pool.install(|| {
        entries
            .par_iter()
            .zip(&waves)
            .map(|(e, w)| {
                let w = w.as_ref()?;
                let result = utterance_features(w, analysis, &nsf)
                    .map_err(anyhow::Error::from)
                    .and_then(|f| {
                        let path = out.join(format!("{}.{FEATURE_EXT}", e.stem()));
                        write_feature_file(&path, &f)?;
                        Ok(f)
                    });
                match result {
                    Ok(f) => Some(f),
                    Err(err) => {
                        log::error!("{}: {err:#}", e.path.display());
                        None
                    }
                }
            })
            .collect()
    });

    let train_rows: Vec<Array2<f64>> = entries
        .iter()
        .zip(&features)
        .filter(|(e, _)| e.split == Split::Train)
        .filter_map(|(_, f)| f.as_ref().map(|f| f.rows.mapv(f64::from)))
        .collect();
    if train_rows.is_empty() {
        bail!("no training utterance could be analyzed");
    }
    let stats = fit_normalizer(&analysis.layout(), &train_rows)?;
    write_atomic(&out.join(STATS_FILE), stats.to_json()?.as_bytes())?;
    write_atomic(
        &out.join(NOISE_SHAPING_FILE),
        serde_json::to_string_pretty(&nsf)?.as_bytes(),
    )?;
    write_atomic(
        &out.join(ANALYSIS_FILE),
        serde_json::to_string_pretty(analysis)?.as_bytes(),
    )?;

    let mut done = Vec::new();
    for (e, f) in entries.iter().zip(&features) {
        if f.is_some() {
            let path = std::fs::canonicalize(&e.path).with_context(|| format!("resolving {}", e.path.display()))?;
            done.push(ManifestEntry { path, split: e.split });
        }
    }
    write_atomic(&out.join(MANIFEST_FILE), format_manifest(&done).as_bytes())?;

    let failed = entries.len() - done.len();
    log::info!("{} feature files written, {failed} failed", done.len());
    Ok(failed == 0)
}
