use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MU_LAW_CLASSES: usize = 256;

/// Quantized waveform symbols, one per sample, each in `0..256`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolSequence(pub Vec<u8>);

impl SymbolSequence {
    /// Validates integer symbols coming from an untyped source.
    pub fn from_ints(values: &[i64]) -> Result<Self> {
        values
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                u8::try_from(v).map_err(|_| Error::SymbolRange { index, symbol: v })
            })
            .collect::<Result<Vec<u8>>>()
            .map(SymbolSequence)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

/// Position of `x` in the companded unit interval: `(f(x) + 1) / 2` with
/// `f(x) = sign(x) ln(1 + mu|x|) / ln(1 + mu)`.
pub fn companded(x: f64, mu: u32) -> f64 {
    let mu = mu as f64;
    let f = x.signum() * (mu * x.abs()).ln_1p() / mu.ln_1p();
    (f + 1.0) / 2.0
}

/// 8-bit mu-law quantization: `clamp(floor(u * 256), 0, 255)` where `u` is
/// the companded position of the sample.
pub fn mu_law_encode<T: Real>(samples: &[T], mu: u32) -> Result<SymbolSequence> {
    if mu == 0 {
        return Err(Error::InvalidArgument("mu must be positive".into()));
    }
    samples
        .iter()
        .enumerate()
        .map(|(index, &s)| {
            let x = s.to_f64_lossy();
            if !x.is_finite() {
                return Err(Error::NonFinite { index });
            }
            let u = companded(x.clamp(-1.0, 1.0), mu);
            Ok((u * MU_LAW_CLASSES as f64).floor().clamp(0.0, 255.0) as u8)
        })
        .collect::<Result<Vec<u8>>>()
        .map(SymbolSequence)
}

/// Expands one symbol to the amplitude at its bin centre.
pub fn mu_law_expand(symbol: u8, mu: u32) -> f64 {
    let mu = mu as f64;
    let y = (symbol as f64 + 0.5) / MU_LAW_CLASSES as f64 * 2.0 - 1.0;
    y.signum() * ((1.0 + mu).powf(y.abs()) - 1.0) / mu
}

pub fn mu_law_decode<T: Real>(symbols: &SymbolSequence, mu: u32) -> Result<Vec<T>> {
    if mu == 0 {
        return Err(Error::InvalidArgument("mu must be positive".into()));
    }
    Ok(symbols
        .0
        .iter()
        .map(|&s| T::of(mu_law_expand(s, mu)))
        .collect())
}
