//! Linear prediction.
//!
//! Sign convention: the predictor is `x̂[t] = Σ a[i] x[t-i]` for `i = 1..=order`,
//! so the inverse filter is `A(z) = 1 - Σ a[i] z^-i` and the synthesis filter
//! is `1 / A(z)`. Every routine in this module, including the LSF conversion,
//! relies on this convention.

mod filter;
mod lsf;

pub use filter::{analysis_filter, synthesis_filter, FilterSchedule};
pub use lsf::{lpc_to_lsf, lsf_to_lpc, LsfVector, LSF_GRID_POINTS};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_ORDER: usize = 40;
pub const DEFAULT_BANDWIDTH_GAMMA: f64 = 0.981;
/// Magnitude reflection coefficients are clamped to when the recursion goes singular.
pub const REFLECTION_CLAMP: f64 = 0.999;
/// Absolute floor on the zero-lag autocorrelation.
pub const R0_FLOOR: f64 = 1e-9;

/// Predictor coefficients `a[1..=order]` stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcCoefficients<T> {
    pub coeffs: Vec<T>,
}

impl<T: Real> LpcCoefficients<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    /// All-zero predictor (`A(z) = 1`).
    pub fn identity(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Inverse-filter polynomial `[1, -a1, ..., -aM]`.
    pub fn inverse_polynomial(&self) -> Vec<T> {
        std::iter::once(T::one())
            .chain(self.coeffs.iter().map(|&a| -a))
            .collect()
    }

    /// Reflection coefficients by the step-down recursion, or `None` when a
    /// stage has `|k| >= 1` (the synthesis filter is then not stable).
    pub fn reflection_coefficients(&self) -> Option<Vec<T>> {
        let m = self.order();
        let mut a = self.coeffs.clone();
        let mut k = vec![T::zero(); m];
        for p in (0..m).rev() {
            let kp = a[p];
            if !kp.is_finite() || kp.abs() >= T::one() {
                return None;
            }
            k[p] = kp;
            let denom = T::one() - kp * kp;
            let prev: Vec<T> = (0..p).map(|i| (a[i] + kp * a[p - 1 - i]) / denom).collect();
            a[..p].copy_from_slice(&prev);
        }
        Some(k)
    }

    /// Whether all roots of `A(z)` lie strictly inside the unit circle.
    pub fn is_stable(&self) -> bool {
        self.reflection_coefficients().is_some()
    }

    pub fn cast<U: Real>(&self) -> LpcCoefficients<U> {
        LpcCoefficients {
            coeffs: self.coeffs.iter().map(|c| U::of(c.to_f64_lossy())).collect(),
        }
    }
}

/// Builds predictor coefficients from reflection coefficients (step-up).
pub fn lpc_from_reflection<T: Real>(reflection: &[T]) -> LpcCoefficients<T> {
    let mut a: Vec<T> = Vec::with_capacity(reflection.len());
    for (m, &k) in reflection.iter().enumerate() {
        let prev = a.clone();
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        a.push(k);
    }
    LpcCoefficients::new(a)
}

/// `r[k] = Σ_t x[t] x[t+k]` for `k = 0..=max_lag`.
pub fn autocorrelate<T: Real>(frame: &[T], max_lag: usize) -> Result<Vec<T>> {
    if frame.is_empty() {
        return Err(Error::Empty("autocorrelation frame"));
    }
    if max_lag >= frame.len() {
        return Err(Error::InvalidArgument(format!(
            "max lag {max_lag} must be below frame length {}",
            frame.len()
        )));
    }
    Ok((0..=max_lag)
        .map(|k| {
            frame[..frame.len() - k]
                .iter()
                .zip(&frame[k..])
                .map(|(&a, &b)| a * b)
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonOutput<T> {
    pub lpc: LpcCoefficients<T>,
    pub reflection: Vec<T>,
    /// Prediction error energy after the final stage.
    pub residual_energy: T,
    /// Number of stages whose reflection coefficient had to be clamped.
    pub clamped_stages: usize,
}

/// Levinson-Durbin recursion for the Toeplitz normal equations.
///
/// `r[0]` is floored at [`R0_FLOOR`]; a stage with `|k| >= 1` is clamped to
/// `±REFLECTION_CLAMP` and reported through `clamped_stages`.
pub fn levinson_durbin<T: Real>(r: &[T], order: usize) -> Result<LevinsonOutput<T>> {
    if r.len() < order + 1 {
        return Err(Error::InvalidArgument(format!(
            "order {order} needs {} autocorrelation lags, got {}",
            order + 1,
            r.len()
        )));
    }
    if let Some(index) = r.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let clamp = T::of(REFLECTION_CLAMP);
    let mut energy = r[0].max(T::of(R0_FLOOR));
    let mut a: Vec<T> = Vec::with_capacity(order);
    let mut reflection = Vec::with_capacity(order);
    let mut clamped_stages = 0;
    for m in 0..order {
        let acc = (0..m).fold(r[m + 1], |acc, i| acc - a[i] * r[m - i]);
        let mut k = acc / energy;
        if !k.is_finite() || k.abs() >= T::one() {
            clamped_stages += 1;
            k = if k.is_finite() { clamp.copysign(k) } else { T::zero() };
        }
        let prev = a.clone();
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        a.push(k);
        reflection.push(k);
        energy = energy * (T::one() - k * k);
    }
    if clamped_stages > 0 {
        log::debug!("levinson-durbin clamped {clamped_stages} reflection coefficient(s)");
    }
    Ok(LevinsonOutput {
        lpc: LpcCoefficients::new(a),
        reflection,
        residual_energy: energy.max(T::zero()),
        clamped_stages,
    })
}

/// Scales `a[i]` by `gamma^i`, pulling every pole radius in by `gamma`.
pub fn bandwidth_expand<T: Real>(lpc: &LpcCoefficients<T>, gamma: T) -> Result<LpcCoefficients<T>> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth expansion factor {gamma} outside (0, 1]"
        )));
    }
    let mut g = T::one();
    Ok(LpcCoefficients::new(
        lpc.coeffs
            .iter()
            .map(|&a| {
                g = g * gamma;
                a * g
            })
            .collect(),
    ))
}
