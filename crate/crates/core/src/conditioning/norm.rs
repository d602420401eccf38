use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::FeatureLayout;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const STD_FLOOR: f64 = 1e-6;

/// Per-dimension mean and population standard deviation. The voicing flag is
/// passed through unchanged (mean 0, std 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormStats {
    pub layout: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Fits statistics over every row of every matrix in `features`.
pub fn fit_normalizer<'a, T: Real + 'a>(
    layout: &FeatureLayout,
    features: impl IntoIterator<Item = &'a Array2<T>>,
) -> Result<NormStats> {
    let dim = layout.dim();
    let mut count = 0usize;
    let mut sum = vec![0.0f64; dim];
    let mut matrices = Vec::new();
    for m in features {
        if m.ncols() != dim {
            return Err(Error::Shape(format!("{} columns, layout has {dim}", m.ncols())));
        }
        for row in m.axis_iter(Axis(0)) {
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v.to_f64_lossy();
            }
        }
        count += m.nrows();
        matrices.push(m);
    }
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "normalizer needs at least 2 frames, got {count}"
        )));
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let mut sq = vec![0.0f64; dim];
    for m in &matrices {
        for row in m.axis_iter(Axis(0)) {
            for ((s, v), mu) in sq.iter_mut().zip(row).zip(&mean) {
                let d = v.to_f64_lossy() - mu;
                *s += d * d;
            }
        }
    }
    let mut std: Vec<f64> = sq.iter().map(|s| (s / count as f64).sqrt()).collect();
    let mut mean = mean;
    for (d, s) in std.iter_mut().enumerate() {
        if *s < STD_FLOOR && d != layout.vuv_index() {
            log::warn!("feature dimension {d} is constant over the training set; std floored");
            *s = STD_FLOOR;
        }
    }
    mean[layout.vuv_index()] = 0.0;
    std[layout.vuv_index()] = 1.0;
    Ok(NormStats {
        layout: layout.describe(),
        mean,
        std,
    })
}

impl NormStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize<T: Real>(&self, features: &Array2<T>) -> Result<Array2<T>> {
        self.check(features)?;
        let mut out = features.clone();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = T::of((v.to_f64_lossy() - m) / s);
            }
        }
        Ok(out)
    }

    pub fn denormalize<T: Real>(&self, features: &Array2<T>) -> Result<Array2<T>> {
        self.check(features)?;
        let mut out = features.clone();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = T::of(v.to_f64_lossy() * s + m);
            }
        }
        Ok(out)
    }

    fn check<T>(&self, features: &Array2<T>) -> Result<()> {
        if features.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "{} feature columns, statistics have {}",
                features.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let stats: NormStats = serde_json::from_str(s)?;
        if stats.mean.len() != stats.std.len() || stats.std.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Format("normalization statistics are inconsistent".into()));
        }
        Ok(stats)
    }
}
