use crate::scalar::Real;

/// Orthonormal DCT-II of `x`, keeping the first `keep` coefficients.
pub fn dct_ii<T: Real>(x: &[T], keep: usize) -> Vec<T> {
    let n = x.len();
    let nf = n as f64;
    (0..keep.min(n))
        .map(|k| {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.to_f64_lossy()
                        * (std::f64::consts::PI * (i as f64 + 0.5) * k as f64 / nf).cos()
                })
                .sum();
            T::of(scale * s)
        })
        .collect()
}

/// Inverse of [`dct_ii`]: missing high-order coefficients are taken as zero.
pub fn dct_iii<T: Real>(coeffs: &[T], n: usize) -> Vec<T> {
    let nf = n as f64;
    (0..n)
        .map(|i| {
            let s: f64 = coeffs
                .iter()
                .enumerate()
                .take(n)
                .map(|(k, c)| {
                    let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                    scale
                        * c.to_f64_lossy()
                        * (std::f64::consts::PI * (i as f64 + 0.5) * k as f64 / nf).cos()
                })
                .sum();
            T::of(s)
        })
        .collect()
}
