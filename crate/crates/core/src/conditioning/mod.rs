//! Auxiliary feature assembly, normalization, and frame-to-sample upsampling.

mod file;
mod matrix;
mod norm;

pub use file::{read_feature_file, write_feature_file, FeatureFile, FEATURE_FILE_VERSION, FEATURE_MAGIC};
pub use matrix::ConditioningMatrix;
pub use norm::{fit_normalizer, NormStats, STD_FLOOR};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::features::{ProsodyFrame, SewRewFrame, REW_DIM, SEW_DIM};
use crate::lp::{LsfVector, DEFAULT_ORDER};
use crate::scalar::Real;

/// Column layout `[lsf, f0, vuv, gain, sew, rew]` of a feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub lsf_dim: usize,
    pub sew_dim: usize,
    pub rew_dim: usize,
}

impl Default for FeatureLayout {
    fn default() -> Self {
        Self {
            lsf_dim: DEFAULT_ORDER,
            sew_dim: SEW_DIM,
            rew_dim: REW_DIM,
        }
    }
}

impl FeatureLayout {
    pub fn dim(&self) -> usize {
        self.lsf_dim + 3 + self.sew_dim + self.rew_dim
    }

    pub fn f0_index(&self) -> usize {
        self.lsf_dim
    }

    pub fn vuv_index(&self) -> usize {
        self.lsf_dim + 1
    }

    pub fn gain_index(&self) -> usize {
        self.lsf_dim + 2
    }

    pub fn sew_range(&self) -> std::ops::Range<usize> {
        let s = self.lsf_dim + 3;
        s..s + self.sew_dim
    }

    pub fn rew_range(&self) -> std::ops::Range<usize> {
        let s = self.sew_range().end;
        s..s + self.rew_dim
    }

    /// Human-readable description stored next to normalization statistics.
    pub fn describe(&self) -> String {
        format!(
            "lsf{},f0,vuv,gain,sew{},rew{}",
            self.lsf_dim, self.sew_dim, self.rew_dim
        )
    }
}

/// Spectral and prosodic analysis of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnalysis<T> {
    pub lsf: LsfVector<T>,
    pub prosody: ProsodyFrame<T>,
}

/// One frame of conditioning features before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryFrame<T> {
    pub lsf: Vec<T>,
    pub f0_hz: T,
    pub voiced: bool,
    pub gain_db: T,
    pub sew: Vec<T>,
    pub rew: Vec<T>,
}

impl<T: Real> AuxiliaryFrame<T> {
    pub fn layout(&self) -> FeatureLayout {
        FeatureLayout {
            lsf_dim: self.lsf.len(),
            sew_dim: self.sew.len(),
            rew_dim: self.rew.len(),
        }
    }

    pub fn to_row(&self) -> Vec<T> {
        let mut row = Vec::with_capacity(self.layout().dim());
        row.extend_from_slice(&self.lsf);
        row.push(self.f0_hz);
        row.push(if self.voiced { T::one() } else { T::zero() });
        row.push(self.gain_db);
        row.extend_from_slice(&self.sew);
        row.extend_from_slice(&self.rew);
        row
    }

    pub fn from_row(layout: &FeatureLayout, row: &[T]) -> Result<Self> {
        if row.len() != layout.dim() {
            return Err(Error::Shape(format!(
                "row of {} values for layout of {}",
                row.len(),
                layout.dim()
            )));
        }
        Ok(Self {
            lsf: row[..layout.lsf_dim].to_vec(),
            f0_hz: row[layout.f0_index()],
            voiced: row[layout.vuv_index()] > T::of(0.5),
            gain_db: row[layout.gain_index()],
            sew: row[layout.sew_range()].to_vec(),
            rew: row[layout.rew_range()].to_vec(),
        })
    }
}

/// Joins per-frame analysis and excitation features into auxiliary frames.
/// Unvoiced frames carry `f0 = 0`.
pub fn assemble<T: Real>(
    analysis: &[FrameAnalysis<T>],
    excitation: &[SewRewFrame<T>],
) -> Result<Vec<AuxiliaryFrame<T>>> {
    if analysis.len() != excitation.len() {
        return Err(Error::Shape(format!(
            "{} analysis frames vs {} excitation frames",
            analysis.len(),
            excitation.len()
        )));
    }
    Ok(analysis
        .iter()
        .zip(excitation)
        .map(|(a, e)| AuxiliaryFrame {
            lsf: a.lsf.frequencies.clone(),
            f0_hz: if a.prosody.voiced { a.prosody.f0_hz } else { T::zero() },
            voiced: a.prosody.voiced,
            gain_db: a.prosody.gain_db,
            sew: e.sew.clone(),
            rew: e.rew.clone(),
        })
        .collect())
}

/// Stacks auxiliary frames into a `frames × dim` matrix.
pub fn to_matrix<T: Real>(frames: &[AuxiliaryFrame<T>]) -> Result<Array2<T>> {
    let dim = frames.first().map_or(0, |f| f.layout().dim());
    let mut data = Vec::with_capacity(frames.len() * dim);
    for f in frames {
        let row = f.to_row();
        if row.len() != dim {
            return Err(Error::Shape("inconsistent auxiliary frame layout".into()));
        }
        data.extend(row);
    }
    Array2::from_shape_vec((frames.len(), dim), data).map_err(|e| Error::Shape(e.to_string()))
}
