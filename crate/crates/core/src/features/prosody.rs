use crate::scalar::Real;
use crate::signal::FrameGrid;

pub const UNVOICED_GAIN_FLOOR_DB: f64 = -120.0;
const ENERGY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Config {
    pub min_hz: f64,
    pub max_hz: f64,
    /// Minimum normalized correlation peak for a voiced decision.
    pub voicing_threshold: f64,
}

impl Default for F0Config {
    fn default() -> Self {
        Self {
            min_hz: 60.0,
            max_hz: 400.0,
            voicing_threshold: 0.3,
        }
    }
}

/// Per-frame pitch, voicing and log energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProsodyFrame<T> {
    /// Zero when unvoiced.
    pub f0_hz: T,
    pub voiced: bool,
    /// `10 log10(mean square + 1e-12)` of the frame.
    pub gain_db: T,
}

/// Pitch by normalized cross-correlation over lags spanning `min_hz..=max_hz`.
///
/// For frame `k` starting at `s`, the score at lag `τ` correlates
/// `x[s..s+N]` with `x[s+τ..s+τ+N]`, normalized by both segment energies, so
/// the decision is invariant to the signal scale. The smallest-lag local
/// maximum within 90% of the best score is taken (guards against period
/// doubling) and refined by parabolic interpolation.
pub fn estimate_f0<T: Real>(
    excitation: &[T],
    grid: &FrameGrid,
    sample_rate_hz: u32,
    config: &F0Config,
) -> Vec<ProsodyFrame<T>> {
    let sr = sample_rate_hz as f64;
    let min_lag = ((sr / config.max_hz).floor() as usize).max(1);
    let max_lag = (sr / config.min_hz).ceil() as usize;
    let n = grid.frame_len;
    let x: Vec<f64> = excitation.iter().map(|v| v.to_f64_lossy()).collect();
    let at = |i: usize| x.get(i).copied().unwrap_or(0.0);

    let mut scores = vec![0.0; max_lag + 2];
    (0..grid.num_frames)
        .map(|k| {
            let s = grid.frame_start(k);
            let e0: f64 = (s..s + n).map(|i| at(i) * at(i)).sum();
            let gain_db = 10.0 * (e0 / n as f64 + ENERGY_FLOOR).log10();
            let unvoiced = ProsodyFrame {
                f0_hz: T::zero(),
                voiced: false,
                gain_db: T::of(gain_db),
            };
            if e0 <= ENERGY_FLOOR {
                return unvoiced;
            }
            // running energy of the lagged segment
            let mut et: f64 = (s + min_lag - 1..s + min_lag - 1 + n)
                .map(|i| at(i) * at(i))
                .sum();
            for lag in min_lag - 1..=max_lag + 1 {
                if lag >= min_lag {
                    et += at(s + lag + n - 1).powi(2) - at(s + lag - 1).powi(2);
                }
                let num: f64 = (0..n).map(|i| at(s + i) * at(s + i + lag)).sum();
                let denom = (e0 * et.max(0.0)).sqrt();
                scores[lag] = if denom > ENERGY_FLOOR { num / denom } else { 0.0 };
            }
            let best = (min_lag..=max_lag)
                .map(|l| scores[l])
                .fold(f64::NEG_INFINITY, f64::max);
            if best < config.voicing_threshold {
                return unvoiced;
            }
            let lag = (min_lag..=max_lag)
                .find(|&l| {
                    scores[l] >= 0.9 * best && scores[l] >= scores[l - 1] && scores[l] >= scores[l + 1]
                })
                .unwrap_or(min_lag);
            let (a, b, c) = (scores[lag - 1], scores[lag], scores[lag + 1]);
            let curvature = a - 2.0 * b + c;
            let offset = if curvature < 0.0 {
                (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            let f0 = sr / (lag as f64 + offset);
            if f0 < config.min_hz || f0 > config.max_hz {
                return unvoiced;
            }
            ProsodyFrame {
                f0_hz: T::of(f0),
                voiced: true,
                gain_db: T::of(gain_db),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn grid(n: usize) -> FrameGrid {
        FrameGrid::from_ms(24_000, 20.0, 5.0, n).unwrap()
    }

    #[test]
    fn pulse_train_at_100_hz() {
        let x: Vec<f64> = (0..24_000).map(|i| if i % 240 == 0 { 1.0 } else { 0.0 }).collect();
        let g = grid(x.len());
        let frames = estimate_f0(&x, &g, 24_000, &F0Config::default());
        let interior = &frames[4..frames.len() - 8];
        for f in interior {
            assert!(f.voiced);
            assert!((f.f0_hz - 100.0).abs() <= 1.0, "{}", f.f0_hz);
        }
    }

    #[test]
    fn white_noise_is_mostly_unvoiced() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..24_000)
            .map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                0.1 * v
            })
            .collect();
        let frames = estimate_f0(&x, &grid(x.len()), 24_000, &F0Config::default());
        let unvoiced = frames.iter().filter(|f| !f.voiced).count();
        assert!(unvoiced as f64 >= 0.9 * frames.len() as f64);
    }

    #[test]
    fn silence_hits_the_gain_floor() {
        let frames = estimate_f0(&[0.0f64; 2400], &grid(2400), 24_000, &F0Config::default());
        for f in frames {
            assert!(!f.voiced);
            assert_eq!(f.f0_hz, 0.0);
            assert!((f.gain_db - UNVOICED_GAIN_FLOOR_DB).abs() < 1e-9);
        }
    }

    #[test]
    fn voiced_f0_stays_in_range() {
        let x: Vec<f64> = (0..12_000)
            .map(|i| (2.0 * std::f64::consts::PI * 180.0 * i as f64 / 24_000.0).sin())
            .collect();
        for f in estimate_f0(&x, &grid(x.len()), 24_000, &F0Config::default()) {
            if f.voiced {
                assert!((60.0..=400.0).contains(&f.f0_hz));
            } else {
                assert_eq!(f.f0_hz, 0.0);
            }
        }
    }
}
