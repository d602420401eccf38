use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use excitvoc::metrics::{aggregate, evaluate, render_table, EvalReport};
use excitvoc::signal::read_wav;
use excitvoc::vocoder::utterance_stem;

use crate::{list_files, write_atomic, Common};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Reference recordings.
    #[arg(long)]
    pub reference: PathBuf,
    /// Generated speech, matched to the references by file stem.
    #[arg(long)]
    pub test: PathBuf,
    /// JSON report path; a text table is written next to it. Defaults to
    /// `paths.report`.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct CorpusReport {
    utterances: Vec<EvalReport>,
    aggregate: Option<EvalReport>,
    missing_in_test: Vec<String>,
    missing_in_reference: Vec<String>,
    failed: Vec<String>,
}

fn by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    Ok(list_files(dir, "wav")?
        .into_iter()
        .map(|p| (utterance_stem(&p), p))
        .collect())
}

pub fn run(args: EvalArgs) -> Result<bool> {
    let config = args.common.load()?;
    let out = args.out.unwrap_or(config.paths.report.clone());
    let refs = by_stem(&args.reference)?;
    let tests = by_stem(&args.test)?;
    if refs.is_empty() {
        bail!("no input files in {}", args.reference.display());
    }
    let missing_in_test: Vec<String> = refs.keys().filter(|k| !tests.contains_key(*k)).cloned().collect();
    let missing_in_reference: Vec<String> = tests.keys().filter(|k| !refs.contains_key(*k)).cloned().collect();
    for s in &missing_in_test {
        log::warn!("{s}: no generated counterpart");
    }
    for s in &missing_in_reference {
        log::warn!("{s}: no reference counterpart");
    }
    let pairs: Vec<(&String, &PathBuf, &PathBuf)> = refs
        .iter()
        .filter_map(|(k, r)| tests.get(k).map(|t| (k, r, t)))
        .collect();

    let pool = args.common.pool()?;
    let results: Vec<Result<EvalReport>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(name, r, t)| {
                let reference = read_wav::<f64>(r)?;
                let test = read_wav::<f64>(t)?;
                Ok(evaluate(name, &reference, &test, &config.eval)?)
            })
            .collect()
    });
    let mut utterances = Vec::new();
    let mut failed = Vec::new();
    for ((name, _, _), r) in pairs.iter().zip(results) {
        match r {
            Ok(rep) => utterances.push(rep),
            Err(e) => {
                log::error!("{name}: {e:#}");
                failed.push((*name).clone());
            }
        }
    }
    let pooled = if utterances.is_empty() {
        None
    } else {
        Some(aggregate("ALL", &utterances)?)
    };
    let complete = missing_in_test.is_empty() && missing_in_reference.is_empty() && failed.is_empty();
    let report = CorpusReport {
        utterances,
        aggregate: pooled,
        missing_in_test,
        missing_in_reference,
        failed,
    };

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    write_atomic(&out, serde_json::to_string_pretty(&report)?.as_bytes())?;
    let mut rows = report.utterances.clone();
    rows.extend(report.aggregate.clone());
    let table = render_table(&rows);
    write_atomic(&out.with_extension("txt"), table.as_bytes())?;
    print!("{table}");
    if report.aggregate.is_none() {
        bail!("no utterance could be evaluated");
    }
    Ok(complete)
}
