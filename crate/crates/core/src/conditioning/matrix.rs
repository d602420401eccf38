use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::FrameGrid;

/// Per-sample conditioning rows, stored as runs of identical rows.
///
/// Frame-rate features held over their frame span (the usual case) cost one
/// stored row per frame; an arbitrary per-sample matrix is one run per
/// sample. Row `t` is `rows[run_of(t)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningMatrix<T> {
    rows: Array2<T>,
    /// Start sample of each run, strictly increasing, first entry 0.
    starts: Vec<usize>,
    num_samples: usize,
}

impl<T: Real> ConditioningMatrix<T> {
    /// Zero-order hold: sample `t` takes frame `floor(t / shift)`.
    pub fn upsample(frames: &Array2<T>, grid: &FrameGrid, num_samples: usize) -> Result<Self> {
        let shift = grid.shift;
        if num_samples > frames.nrows() * shift {
            return Err(Error::Shape(format!(
                "{} frames of {shift} samples cannot cover {num_samples} samples",
                frames.nrows()
            )));
        }
        let used = num_samples.div_ceil(shift);
        Ok(Self {
            rows: frames.slice(ndarray::s![..used, ..]).to_owned(),
            starts: (0..used).map(|k| k * shift).collect(),
            num_samples,
        })
    }

    /// One run per sample.
    pub fn from_dense(rows: Array2<T>) -> Self {
        let n = rows.nrows();
        Self {
            rows,
            starts: (0..n).collect(),
            num_samples: n,
        }
    }

    /// A zero-width condition (`dim = 0`) for unconditioned models.
    pub fn empty(num_samples: usize) -> Self {
        Self {
            rows: Array2::zeros((usize::from(num_samples > 0), 0)),
            starts: if num_samples > 0 { vec![0] } else { Vec::new() },
            num_samples,
        }
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn num_runs(&self) -> usize {
        self.starts.len()
    }

    pub fn run_rows(&self) -> ArrayView2<'_, T> {
        self.rows.view()
    }

    pub fn run_starts(&self) -> &[usize] {
        &self.starts
    }

    /// Half-open sample span of run `r`.
    pub fn run_span(&self, r: usize) -> (usize, usize) {
        let end = self.starts.get(r + 1).copied().unwrap_or(self.num_samples);
        (self.starts[r], end)
    }

    pub fn run_of(&self, t: usize) -> usize {
        self.starts.partition_point(|&s| s <= t) - 1
    }

    pub fn row(&self, t: usize) -> ArrayView1<'_, T> {
        self.rows.row(self.run_of(t))
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut out = Array2::zeros((self.num_samples, self.dim()));
        for r in 0..self.num_runs() {
            let (s, e) = self.run_span(r);
            for t in s..e {
                out.row_mut(t).assign(&self.rows.row(r));
            }
        }
        out
    }

    /// Samples `start..end` as a new matrix.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.num_samples {
            return Err(Error::Shape(format!(
                "slice {start}..{end} outside {} samples",
                self.num_samples
            )));
        }
        if start == end {
            return Ok(Self {
                rows: Array2::zeros((0, self.dim())),
                starts: Vec::new(),
                num_samples: 0,
            });
        }
        let first = self.run_of(start);
        let last = self.run_of(end - 1);
        let rows = self.rows.slice(ndarray::s![first..=last, ..]).to_owned();
        let starts = (first..=last)
            .map(|r| self.starts[r].max(start) - start)
            .collect();
        Ok(Self {
            rows,
            starts,
            num_samples: end - start,
        })
    }

    /// Rows at `k * shift`, the inverse of [`ConditioningMatrix::upsample`].
    pub fn downsample(&self, shift: usize) -> Array2<T> {
        let n = self.num_samples.div_ceil(shift);
        let mut out = Array2::zeros((n, self.dim()));
        for (k, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            row.assign(&self.row(k * shift));
        }
        out
    }

    /// Casts every row to another precision.
    pub fn cast<U: Real>(&self) -> ConditioningMatrix<U> {
        ConditioningMatrix {
            rows: self.rows.mapv(|v| U::of(v.to_f64_lossy())),
            starts: self.starts.clone(),
            num_samples: self.num_samples,
        }
    }

    /// Replaces columns `range` with zeros in every row.
    pub fn zero_columns(&mut self, range: std::ops::Range<usize>) {
        self.rows
            .slice_mut(ndarray::s![.., range])
            .fill(T::zero());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(n: usize, dim: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, dim), |(i, j)| (i * 10 + j) as f64)
    }

    #[test]
    fn zero_order_hold() {
        let grid = FrameGrid::new(480, 120, 240).unwrap();
        let f = frames(2, 3);
        let c = ConditioningMatrix::upsample(&f, &grid, 240).unwrap();
        let d = c.to_dense();
        for t in 0..120 {
            assert_eq!(d.row(t), f.row(0));
        }
        for t in 120..240 {
            assert_eq!(d.row(t), f.row(1));
        }
    }

    #[test]
    fn partial_last_frame() {
        let grid = FrameGrid::new(480, 120, 250).unwrap();
        let f = frames(3, 2);
        let c = ConditioningMatrix::upsample(&f, &grid, 250).unwrap();
        let d = c.to_dense();
        assert_eq!(d.nrows(), 250);
        for t in 240..250 {
            assert_eq!(d.row(t), f.row(2));
        }
        assert_eq!(c.downsample(120), f);
    }

    #[test]
    fn insufficient_frames() {
        let grid = FrameGrid::new(480, 120, 400).unwrap();
        assert!(ConditioningMatrix::upsample(&frames(3, 2), &grid, 400).is_err());
    }

    #[test]
    fn slicing_matches_dense() {
        let grid = FrameGrid::new(40, 10, 95).unwrap();
        let c = ConditioningMatrix::upsample(&frames(10, 4), &grid, 95).unwrap();
        let dense = c.to_dense();
        for (s, e) in [(0, 95), (3, 17), (10, 20), (11, 12), (94, 95), (7, 7)] {
            let sub = c.slice(s, e).unwrap();
            assert_eq!(sub.to_dense(), dense.slice(ndarray::s![s..e, ..]).to_owned());
        }
    }
}
