//! The three trainable systems built on one network: speech targets (WN),
//! noise-shaped residual targets (WN_NS) and LP residual targets
//! (EXCITNET). Covers feature extraction, target preparation and
//! inversion, training and synthesis.

mod analysis;
mod corpus;
mod model;
pub mod synthetic;
mod target;
mod train;

pub use analysis::{
    analyze_utterance, envelope, frame_lpc, lpc_from_features, quantize_lsf, AnalysisConfig,
    UtteranceAnalysis,
};
pub use corpus::{
    format_manifest, parse_manifest, utterance_features, utterance_stem, ManifestEntry, Split,
};
pub use model::{ModelMeta, VocoderModel, FALLBACK_CREST_FACTOR};
pub use target::{
    autocorrelation_sum, fit_noise_shaping_filter, noise_shaping_from_sums, prepare_target,
    reconstruct, snr_db, target_gain, target_signal, NoiseShapingFilter, VariantTag,
};
pub use train::{
    curve_csv, smooth, teacher_forced_nll, training_utterance, CurvePoint, Trainer,
    TrainingUtterance, EVAL_CHUNK,
};
