use std::f64::consts::PI;

use super::{bandwidth_expand, LpcCoefficients};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grid resolution for the first pass of root isolation.
pub const LSF_GRID_POINTS: usize = 4096;
const BISECTION_TOL: f64 = 1e-12;
const MAX_GRID_POINTS: usize = 1 << 20;

/// Line spectral frequencies in radians, strictly increasing inside `(0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsfVector<T> {
    pub frequencies: Vec<T>,
}

impl<T: Real> LsfVector<T> {
    pub fn new(frequencies: Vec<T>) -> Result<Self> {
        let v = Self { frequencies };
        v.validate()?;
        Ok(v)
    }

    pub fn order(&self) -> usize {
        self.frequencies.len()
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev = T::zero();
        for (index, &w) in self.frequencies.iter().enumerate() {
            if !(w > prev) || !(w < T::PI()) {
                return Err(Error::LsfOrder { index });
            }
            prev = w;
        }
        Ok(())
    }

    /// Evenly spaced frequencies `k π / (order + 1)`: the LSFs of `A(z) = 1`.
    pub fn uniform(order: usize) -> Self {
        Self {
            frequencies: (1..=order)
                .map(|k| T::of(k as f64 * PI / (order + 1) as f64))
                .collect(),
        }
    }
}

/// Sum and difference polynomials with their trivial roots at z = ±1 divided out.
/// Both results are symmetric, of degree `order` (sum) and `order` or
/// `order - 1` (difference).
fn reduced_polynomials(a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = a.len();
    let mut poly = vec![0.0; m + 2];
    poly[0] = 1.0;
    for (i, &c) in a.iter().enumerate() {
        poly[i + 1] = -c;
    }
    let n = m + 1;
    let p: Vec<f64> = (0..=n).map(|k| poly[k] + poly[n - k]).collect();
    let q: Vec<f64> = (0..=n).map(|k| poly[k] - poly[n - k]).collect();
    if m % 2 == 0 {
        (deflate(&p, -1.0), deflate(&q, 1.0))
    } else {
        (p, deflate(&deflate(&q, 1.0), -1.0))
    }
}

/// Divides by `(1 - root z^-1)`; the remainder is dropped.
fn deflate(poly: &[f64], root: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(poly.len() - 1);
    let mut acc = 0.0;
    for &c in &poly[..poly.len() - 1] {
        acc = c + root * acc;
        out.push(acc);
    }
    out
}

/// `e^{jωN/2} C(e^{jω})` for a symmetric polynomial of degree `N`: a real
/// cosine sum whose zeros are the root angles.
fn symmetric_response(c: &[f64], w: f64) -> f64 {
    let half = (c.len() - 1) as f64 / 2.0;
    c.iter()
        .enumerate()
        .map(|(k, &ck)| ck * ((half - k as f64) * w).cos())
        .sum()
}

fn isolate_roots(c: &[f64], grid_points: usize) -> Vec<f64> {
    let step = PI / grid_points as f64;
    let mut roots = Vec::new();
    let mut w0 = 0.0;
    let mut f0 = symmetric_response(c, w0);
    for i in 1..=grid_points {
        let w1 = if i == grid_points { PI } else { i as f64 * step };
        let f1 = symmetric_response(c, w1);
        if f0 == 0.0 && w0 > 0.0 {
            roots.push(w0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (w0, w1, f0);
            while hi - lo > BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = symmetric_response(c, mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        w0 = w1;
        f0 = f1;
    }
    roots
}

/// Converts predictor coefficients to line spectral frequencies.
///
/// Unstable input is first bandwidth-expanded until it becomes minimum
/// phase. Roots are bracketed on a 4096-point grid over `[0, π]` and refined
/// by bisection; if closely spaced roots share a grid cell the grid is
/// refined until all `order` roots are found.
pub fn lpc_to_lsf<T: Real>(lpc: &LpcCoefficients<T>) -> Result<LsfVector<T>> {
    let m = lpc.order();
    if m == 0 {
        return Ok(LsfVector {
            frequencies: Vec::new(),
        });
    }
    let mut lpc = lpc.cast::<f64>();
    let mut expansions = 0;
    while !lpc.is_stable() {
        if expansions == 200 {
            return Err(Error::Unstable { frame: 0 });
        }
        lpc = bandwidth_expand(&lpc, 0.98)?;
        expansions += 1;
    }
    if expansions > 0 {
        log::debug!("lpc_to_lsf: applied {expansions} bandwidth expansion(s) to stabilize input");
    }
    let (p, q) = reduced_polynomials(&lpc.coeffs);
    let mut grid = LSF_GRID_POINTS;
    loop {
        let mut roots = isolate_roots(&p, grid);
        roots.extend(isolate_roots(&q, grid));
        if roots.len() == m {
            roots.sort_by(|a, b| a.total_cmp(b));
            return Ok(LsfVector {
                frequencies: roots.into_iter().map(T::of).collect(),
            });
        }
        if grid >= MAX_GRID_POINTS {
            return Err(Error::LsfRoots {
                expected: m,
                found: roots.len(),
                p,
                q,
            });
        }
        grid *= 8;
    }
}

/// Rebuilds predictor coefficients from strictly increasing LSFs.
///
/// Odd-numbered frequencies (1st, 3rd, ...) are roots of the sum polynomial,
/// even-numbered ones of the difference polynomial.
pub fn lsf_to_lpc<T: Real>(lsf: &LsfVector<T>) -> Result<LpcCoefficients<T>> {
    lsf.validate()?;
    let m = lsf.order();
    let w: Vec<f64> = lsf.frequencies.iter().map(|w| w.to_f64_lossy()).collect();
    let p_roots: Vec<f64> = w.iter().copied().step_by(2).collect();
    let q_roots: Vec<f64> = w.iter().copied().skip(1).step_by(2).collect();
    let mut p = product_of_pairs(&p_roots);
    let mut q = product_of_pairs(&q_roots);
    if m % 2 == 0 {
        p = convolve(&p, &[1.0, 1.0]);
        q = convolve(&q, &[1.0, -1.0]);
    } else {
        q = convolve(&q, &[1.0, 0.0, -1.0]);
    }
    Ok(LpcCoefficients::new(
        (1..=m).map(|k| T::of(-0.5 * (p[k] + q[k]))).collect(),
    ))
}

/// `Π (1 - 2 cos ω z^-1 + z^-2)`, taking factors alternately from the low and
/// high ends of the list so intermediate coefficients stay small.
fn product_of_pairs(roots: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    let (mut lo, mut hi) = (0, roots.len());
    let mut from_low = true;
    while lo < hi {
        let w = if from_low {
            lo += 1;
            roots[lo - 1]
        } else {
            hi -= 1;
            roots[hi]
        };
        from_low = !from_low;
        out = convolve(&out, &[1.0, -2.0 * w.cos(), 1.0]);
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
