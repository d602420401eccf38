mod analyze;
mod config;
mod evaluate;
mod synth;
mod train;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Environment variable holding the log filter (`error`..`trace`).
const LOG_ENV: &str = "EXCITVOC_LOG";

#[derive(Parser, Debug)]
#[command(name = "excitvoc", version, about = "Excitation-domain neural vocoder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract feature files, normalization statistics and the noise-shaping filter.
    Analyze(analyze::AnalyzeArgs),
    /// Train one vocoder variant.
    Train(train::TrainArgs),
    /// Generate waveforms from feature files.
    Synthesize(synth::SynthArgs),
    /// Score generated speech against reference recordings.
    Evaluate(evaluate::EvalArgs),
    /// Configuration file helpers.
    Config {
        #[command(subcommand)]
        command: ConfigCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ConfigCommand {
    /// Write the full default configuration.
    Init {
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
}

/// Flags shared by the batch commands.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-utterance work (0 = all cores).
    #[arg(long, short, default_value_t = 0)]
    pub jobs: usize,
}

impl Common {
    pub fn load(&self) -> Result<RunConfig> {
        RunConfig::load(self.config.as_deref())
    }

    pub fn pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build()?)
    }
}

/// Writes through a temporary sibling so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Files in `dir` with extension `ext` (case-insensitive), sorted by path.
pub fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let matches = path
            .extension()
            .is_some_and(|e| e.to_string_lossy().eq_ignore_ascii_case(ext));
        if matches && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn config_init(out: Option<PathBuf>, force: bool) -> Result<()> {
    let text = RunConfig::default().to_toml()?;
    match out {
        None => print!("{text}"),
        Some(path) => {
            if path.exists() && !force {
                bail!("{} exists; pass --force to overwrite", path.display());
            }
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

/// `Ok(false)` means the command finished but some items failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze(args) => analyze::run(args),
        Command::Train(args) => train::run(args).map(|_| true),
        Command::Synthesize(args) => synth::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Config {
            command: ConfigCommand::Init { out, force },
        } => config_init(out, force).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
