use super::LpcCoefficients;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::FrameGrid;

const DIVERGENCE_LIMIT: f64 = 100.0;

/// Time-varying coefficient schedule: sample `t` uses the set of frame
/// `floor(t / shift)`. Filter memory runs continuously across frame
/// boundaries, which makes analysis and synthesis exact inverses.
#[derive(Debug, Clone, Copy)]
pub struct FilterSchedule<'a, T> {
    pub frames: &'a [LpcCoefficients<T>],
    pub grid: &'a FrameGrid,
}

impl<'a, T: Real> FilterSchedule<'a, T> {
    pub fn new(frames: &'a [LpcCoefficients<T>], grid: &'a FrameGrid) -> Self {
        Self { frames, grid }
    }

    fn check(&self, num_samples: usize) -> Result<usize> {
        if self.frames.len() != self.grid.num_frames {
            return Err(Error::Shape(format!(
                "{} coefficient sets for {} frames",
                self.frames.len(),
                self.grid.num_frames
            )));
        }
        if self.grid.num_frames * self.grid.shift < num_samples {
            return Err(Error::Shape(format!(
                "{} frames of shift {} do not cover {num_samples} samples",
                self.grid.num_frames, self.grid.shift
            )));
        }
        let order = self.frames.first().map_or(0, LpcCoefficients::order);
        if self.frames.iter().any(|f| f.order() != order) {
            return Err(Error::Shape("mixed filter orders in schedule".into()));
        }
        Ok(order)
    }
}

/// Inverse (analysis) filtering: `e[t] = x[t] - Σ a_i(frame(t)) x[t-i]`,
/// with zero history before the first sample.
pub fn analysis_filter<T: Real>(samples: &[T], schedule: FilterSchedule<'_, T>) -> Result<Vec<T>> {
    let order = schedule.check(samples.len())?;
    let mut out = Vec::with_capacity(samples.len());
    for (t, &x) in samples.iter().enumerate() {
        let a = &schedule.frames[t / schedule.grid.shift].coeffs;
        let past = &samples[t.saturating_sub(order)..t];
        let pred = a
            .iter()
            .zip(past.iter().rev())
            .fold(T::zero(), |acc, (&ai, &xi)| acc + ai * xi);
        out.push(x - pred);
    }
    Ok(out)
}

/// All-pole (synthesis) filtering: `x[t] = e[t] + Σ a_i(frame(t)) x[t-i]`.
///
/// Aborts with the frame index once any output magnitude exceeds 100.
pub fn synthesis_filter<T: Real>(
    excitation: &[T],
    schedule: FilterSchedule<'_, T>,
) -> Result<Vec<T>> {
    let order = schedule.check(excitation.len())?;
    let limit = T::of(DIVERGENCE_LIMIT);
    let mut out: Vec<T> = Vec::with_capacity(excitation.len());
    for (t, &e) in excitation.iter().enumerate() {
        let frame = t / schedule.grid.shift;
        let a = &schedule.frames[frame].coeffs;
        let past = &out[t.saturating_sub(order)..t];
        let x = a
            .iter()
            .zip(past.iter().rev())
            .fold(e, |acc, (&ai, &xi)| acc + ai * xi);
        if !(x.abs() <= limit) {
            return Err(Error::Diverged {
                frame,
                magnitude: x.abs().to_f64_lossy(),
            });
        }
        out.push(x);
    }
    Ok(out)
}
