//! Seeded speech-like test signals: alternating voiced and unvoiced
//! segments through slowly moving formant resonators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::signal::Waveform;

#[derive(Debug, Clone, PartialEq)]
pub struct SpeechLikeConfig {
    pub sample_rate_hz: u32,
    pub duration_s: f64,
    pub f0_range_hz: (f64, f64),
    pub peak: f64,
}

impl SpeechLikeConfig {
    pub fn new(sample_rate_hz: u32, duration_s: f64) -> Self {
        Self {
            sample_rate_hz,
            duration_s,
            f0_range_hz: (90.0, 240.0),
            peak: 0.5,
        }
    }
}

struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bw: f64, sr: f64) -> f64 {
        let r = (-std::f64::consts::PI * bw / sr).exp();
        let c = 2.0 * r * (2.0 * std::f64::consts::PI * freq / sr).cos();
        let gain = 1.0 - c + r * r;
        let y = gain * x + c * self.y1 - r * r * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

pub fn speech_like(config: &SpeechLikeConfig, seed: u64) -> Waveform<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = config.sample_rate_hz as f64;
    let n = (config.duration_s * sr).round() as usize;
    let nyquist = sr / 2.0;

    // (end sample, voiced)
    let mut segments = Vec::new();
    let mut pos = 0usize;
    let mut voiced = rng.random_bool(0.5);
    while pos < n {
        let secs = if voiced {
            rng.random_range(0.15..0.30)
        } else {
            rng.random_range(0.05..0.12)
        };
        pos = (pos + (secs * sr) as usize).min(n);
        segments.push((pos, voiced));
        voiced = !voiced;
    }

    let base_f0 = rng.random_range(config.f0_range_hz.0..config.f0_range_hz.1);
    let formant_base = [
        rng.random_range(350.0..750.0),
        rng.random_range(1000.0..2000.0),
        rng.random_range(2400.0..2900.0),
        3500.0,
    ];
    let formant_rate: Vec<f64> = (0..4).map(|_| rng.random_range(1.0..4.0)).collect();
    let bandwidths = [80.0, 110.0, 160.0, 250.0];
    let mut resonators: Vec<Resonator> = (0..4).map(|_| Resonator { y1: 0.0, y2: 0.0 }).collect();

    let ramp = (0.01 * sr) as usize;
    let mut out = Vec::with_capacity(n);
    let mut phase = 0.0f64;
    let mut seg = 0usize;
    let mut seg_start = 0usize;
    for t in 0..n {
        while t >= segments[seg].0 {
            seg_start = segments[seg].0;
            seg += 1;
        }
        let (seg_end, is_voiced) = segments[seg];
        let time = t as f64 / sr;
        let noise: f64 = StandardNormal.sample(&mut rng);
        let source = if is_voiced {
            let f0 = (base_f0 * (1.0 + 0.08 * (2.0 * std::f64::consts::PI * 0.7 * time).sin()))
                .clamp(config.f0_range_hz.0, config.f0_range_hz.1);
            phase += f0 / sr;
            let pulse = if phase >= 1.0 {
                phase -= 1.0;
                1.0
            } else {
                0.0
            };
            pulse + 0.02 * noise
        } else {
            0.15 * noise
        };
        let edge = (t - seg_start).min(seg_end - t).min(ramp) as f64 / ramp.max(1) as f64;
        let mut y = source * (0.3 + 0.7 * edge);
        for (k, res) in resonators.iter_mut().enumerate() {
            let drift = 1.0 + 0.15 * (2.0 * std::f64::consts::PI * formant_rate[k] * time / 4.0).sin();
            let f = (formant_base[k] * drift).min(0.9 * nyquist);
            y = res.step(y, f, bandwidths[k], sr);
        }
        out.push(y);
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= config.peak / peak);
    }
    Waveform {
        samples: out,
        sample_rate_hz: config.sample_rate_hz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let cfg = SpeechLikeConfig::new(16_000, 1.0);
        let a = speech_like(&cfg, 1);
        assert_eq!(a, speech_like(&cfg, 1));
        assert_ne!(a, speech_like(&cfg, 2));
        assert_eq!(a.len(), 16_000);
        assert!((a.peak() - 0.5).abs() < 1e-12);
    }
}
