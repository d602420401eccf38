use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("wav container error in {path}: {message}")]
    Wav { path: PathBuf, message: String },
    #[error("unsupported audio in {path}: {message}")]
    UnsupportedAudio { path: PathBuf, message: String },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("symbol {symbol} at index {index} is outside [0, 255]")]
    SymbolRange { index: usize, symbol: i64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("lsf root isolation found {found} of {expected} roots; P'={p:?} Q'={q:?}")]
    LsfRoots {
        expected: usize,
        found: usize,
        p: Vec<f64>,
        q: Vec<f64>,
    },
    #[error("lsf vector is not strictly increasing inside (0, pi) at index {index}")]
    LsfOrder { index: usize },
    #[error("synthesis filter diverged in frame {frame} (|x| = {magnitude})")]
    Diverged { frame: usize, magnitude: f64 },
    #[error("reconstruction filter for frame {frame} is unstable")]
    Unstable { frame: usize },
    #[error("silent utterance: target normalization gain is zero")]
    SilentUtterance,
    #[error("variant mismatch: checkpoint is {checkpoint}, requested {requested}")]
    VariantMismatch {
        checkpoint: String,
        requested: String,
    },
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: u64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
