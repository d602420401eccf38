use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use excitvoc::conditioning::read_feature_file;
use excitvoc::nn::{Checkpoint, GenerationMode};
use excitvoc::signal::write_wav;
use excitvoc::vocoder::{utterance_stem, VariantTag, VocoderModel};

use crate::analyze::FEATURE_EXT;
use crate::{list_files, Common};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Must match the variant the checkpoint was trained as.
    #[arg(long)]
    pub variant: VariantTag,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Feature files, or directories searched for them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output directory; defaults to `paths.synth_dir`.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Take the most likely symbol instead of sampling.
    #[arg(long)]
    pub argmax: bool,
    #[command(flatten)]
    pub common: Common,
}

/// Per-utterance generation seed; depends only on the run seed and the
/// utterance name so results do not change with the input set or order.
fn utterance_seed(seed: u64, stem: &str) -> u64 {
    stem.bytes().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn run(args: SynthArgs) -> Result<bool> {
    let config = args.common.load()?;
    let seed = args.seed.unwrap_or(config.seed);
    let out = args.out.unwrap_or(config.paths.synth_dir.clone());
    let mode = if args.argmax {
        GenerationMode::Argmax
    } else {
        GenerationMode::Sample
    };
    let ck = Checkpoint::load(&args.checkpoint)?;
    let model = VocoderModel::from_checkpoint(&ck)?;
    if model.meta.variant != args.variant {
        return Err(excitvoc::Error::VariantMismatch {
            checkpoint: model.meta.variant.to_string(),
            requested: args.variant.to_string(),
        }
        .into());
    }

    let mut files = Vec::new();
    for input in &args.inputs {
        if input.is_dir() {
            files.extend(list_files(input, FEATURE_EXT)?);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        bail!("no input files");
    }
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    log::info!(
        "synthesizing {} utterances with {} (step {})",
        files.len(),
        args.variant,
        model.step
    );

    let pool = args.common.pool()?;
    let ok: Vec<bool> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let stem = utterance_stem(path);
                let result = (|| -> Result<()> {
                    let features = read_feature_file(path)?;
                    let wave = model.synthesize(args.variant, &features, utterance_seed(seed, &stem), mode)?;
                    let report = write_wav(&wave, out.join(format!("{stem}.wav")))?;
                    if report.clipped > 0 {
                        log::warn!("{stem}: {} samples clipped", report.clipped);
                    }
                    Ok(())
                })();
                match result {
                    Ok(()) => true,
                    Err(e) => {
                        log::error!("{}: {e:#}", path.display());
                        false
                    }
                }
            })
            .collect()
    });
    Ok(ok.iter().all(|&b| b))
}
