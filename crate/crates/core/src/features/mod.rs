//! Excitation-side features: prosody (F0, voicing, gain) and the slowly /
//! rapidly evolving decomposition of the excitation's spectral trajectory.
//!
//! The trajectory used here is a mel-band magnitude-spectrum track of the
//! excitation. It is split along time by a zero-phase low-pass into a slowly
//! evolving part (SEW) and the remainder (REW), and each part is reduced
//! over the band axis by a truncated DCT.

mod dct;
mod prosody;
mod tfte;

pub use dct::{dct_ii, dct_iii};
pub use prosody::{estimate_f0, F0Config, ProsodyFrame, UNVOICED_GAIN_FLOOR_DB};
pub use tfte::{
    compute_tfte, decompose_sew_rew, moving_average_half_width, SewRewDecomposition,
    SewRewFrame, TfteMatrix,
};

pub const DEFAULT_TFTE_BINS: usize = 40;
pub const SEW_DIM: usize = 32;
pub const REW_DIM: usize = 4;
pub const DEFAULT_SEW_CUTOFF_HZ: f64 = 20.0;
