use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use excitvoc::conditioning::{read_feature_file, NormStats};
use excitvoc::nn::Checkpoint;
use excitvoc::signal::read_wav;
use excitvoc::vocoder::{
    curve_csv, parse_manifest, training_utterance, AnalysisConfig, CurvePoint, ModelMeta, NoiseShapingFilter,
    Split, Trainer, TrainingUtterance, VariantTag,
};

use crate::analyze::{ANALYSIS_FILE, FEATURE_EXT, MANIFEST_FILE, NOISE_SHAPING_FILE, STATS_FILE};
use crate::config::Preset;
use crate::{write_atomic, Common};

pub const LAST_CHECKPOINT: &str = "last.ckpt";
pub const BEST_CHECKPOINT: &str = "best.ckpt";
pub const CURVE_FILE: &str = "curve.csv";

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// WN, WN_NS or EXCITNET.
    #[arg(long)]
    pub variant: VariantTag,
    /// Corpus manifest; defaults to the one written by `analyze`.
    #[arg(long, short)]
    pub manifest: Option<PathBuf>,
    /// Directory produced by `analyze`; defaults to `paths.features_dir`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Checkpoint directory; defaults to `paths.checkpoint_dir`.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Continue from a checkpoint written with optimizer state.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub eval_interval: Option<u64>,
    /// Zero the SEW and REW conditioning columns.
    #[arg(long)]
    pub zero_sew_rew: bool,
    #[command(flatten)]
    pub common: Common,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_curve(text: &str) -> Result<Vec<CurvePoint>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 3 {
                bail!("bad curve line {l:?}");
            }
            Ok(CurvePoint {
                step: f[0].trim().parse()?,
                train_nll: f[1].trim().parse()?,
                dev_nll: f[2].trim().parse()?,
            })
        })
        .collect()
}

pub fn run(args: TrainArgs) -> Result<()> {
    let mut config = args.common.load()?;
    if let Some(p) = args.preset {
        config.net.preset = p;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(v) = args.max_steps {
        config.train.max_steps = v;
    }
    if let Some(v) = args.learning_rate {
        config.train.learning_rate = v;
    }
    if let Some(v) = args.batch_size {
        config.train.batch_size_samples = v;
    }
    if let Some(v) = args.eval_interval {
        config.train.eval_interval = v;
    }
    config.net.zero_sew_rew |= args.zero_sew_rew;
    config.validate()?;

    let features_dir = args.features.unwrap_or(config.paths.features_dir.clone());
    let out = args.out.unwrap_or(config.paths.checkpoint_dir.clone());
    let manifest_path = args.manifest.unwrap_or_else(|| features_dir.join(MANIFEST_FILE));

    let analysis: AnalysisConfig = read_json(&features_dir.join(ANALYSIS_FILE))?;
    if analysis != config.analysis {
        bail!(
            "features in {} were extracted with a different [analysis] section",
            features_dir.display()
        );
    }
    let norm: NormStats = read_json(&features_dir.join(STATS_FILE))?;
    let nsf: NoiseShapingFilter = read_json(&features_dir.join(NOISE_SHAPING_FILE))?;

    let meta = match &args.resume {
        Some(path) => {
            let meta = ModelMeta::from_checkpoint(&Checkpoint::load(path)?)?;
            if meta.variant != args.variant {
                bail!("checkpoint {} is {}, not {}", path.display(), meta.variant, args.variant);
            }
            meta
        }
        None => ModelMeta {
            variant: args.variant,
            analysis: analysis.clone(),
            norm,
            noise_shaping: (args.variant == VariantTag::WnNs).then_some(nsf),
            zero_sew_rew: config.net.zero_sew_rew,
        },
    };

    let text =
        std::fs::read_to_string(&manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text)?;
    let pool = args.common.pool()?;
    let load = |split: Split| -> Result<Vec<TrainingUtterance>> {
        let chosen: Vec<_> = entries.iter().filter(|e| e.split == split).collect();
        pool.install(|| {
            chosen
                .par_iter()
                .map(|e| {
                    let stem = e.stem();
                    let fpath = features_dir.join(format!("{stem}.{FEATURE_EXT}"));
                    if !fpath.exists() {
                        bail!("missing features for {stem}: {}", fpath.display());
                    }
                    let features = read_feature_file(&fpath)?;
                    let wave = read_wav::<f64>(root.join(&e.path))?;
                    training_utterance(&stem, &wave, &features, &meta).with_context(|| format!("preparing {stem}"))
                })
                .collect()
        })
    };
    let train = load(Split::Train)?;
    let dev = load(Split::Dev)?;
    if train.is_empty() {
        bail!("manifest {} has no training utterances", manifest_path.display());
    }
    log::info!(
        "{} on {} training and {} development utterances",
        args.variant,
        train.len(),
        dev.len()
    );

    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let curve_path = out.join(CURVE_FILE);
    let train_config = config.train_config();
    let (mut trainer, mut history) = match &args.resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            let history = match std::fs::read_to_string(&curve_path) {
                Ok(text) => parse_curve(&text)?.into_iter().filter(|p| p.step <= ck.step).collect(),
                Err(_) => Vec::new(),
            };
            (Trainer::resume(&train, &dev, &ck, train_config)?, history)
        }
        None => (
            Trainer::new(&train, &dev, config.net_config(), train_config, meta)?,
            Vec::new(),
        ),
    };
    let mut best_written = history
        .iter()
        .map(|p| p.dev_nll)
        .filter(|v| !v.is_nan())
        .fold(f64::INFINITY, f64::min);

    let mut failure: Option<anyhow::Error> = None;
    trainer.run(|point, t| {
        if failure.is_some() {
            return;
        }
        history.push(*point);
        let result = (|| -> Result<()> {
            write_atomic(&out.join(LAST_CHECKPOINT), &t.checkpoint(true)?.to_bytes()?)?;
            if let Some((nll, ck)) = t.best() {
                if nll.is_nan() || nll < best_written {
                    write_atomic(&out.join(BEST_CHECKPOINT), &ck.to_bytes()?)?;
                    best_written = nll;
                }
            }
            write_atomic(&curve_path, curve_csv(&history).as_bytes())
        })();
        if let Err(e) = result {
            log::error!("writing checkpoint: {e:#}");
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if trainer.skipped_updates() > 0 {
        log::warn!("{} updates skipped on non-finite gradients", trainer.skipped_updates());
    }
    log::info!("finished at step {}", trainer.step);
    Ok(())
}
