use serde::{Deserialize, Serialize};

use super::{common_length, f0_rmse, frame_lsd, region_lsd, DEFAULT_LSD_FFT_SIZE, DEFAULT_LSD_FRAME_MS};
use crate::error::{Error, Result};
use crate::features::{estimate_f0, F0Config};
use crate::signal::{FrameGrid, Waveform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub fft_size: usize,
    pub frame_ms: f64,
    pub shift_ms: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let f0 = F0Config::default();
        Self {
            fft_size: DEFAULT_LSD_FFT_SIZE,
            frame_ms: DEFAULT_LSD_FRAME_MS,
            shift_ms: 5.0,
            f0_min_hz: f0.min_hz,
            f0_max_hz: f0.max_hz,
            voicing_threshold: f0.voicing_threshold,
        }
    }
}

impl EvalConfig {
    pub fn f0_config(&self) -> F0Config {
        F0Config {
            min_hz: self.f0_min_hz,
            max_hz: self.f0_max_hz,
            voicing_threshold: self.voicing_threshold,
        }
    }
}

/// Objective scores of one utterance or a pooled set. Region LSDs and F0
/// RMSE are absent when their frame set is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub name: String,
    pub lsd_db: f64,
    pub lsd_voiced_db: Option<f64>,
    pub lsd_uv_transition_db: Option<f64>,
    pub f0_rmse_hz: Option<f64>,
    pub frames: usize,
    pub voiced_frames: usize,
    pub uv_transition_frames: usize,
    pub both_voiced_frames: usize,
}

/// Scores `test` against `reference`. Voicing regions come from the
/// reference; F0 is estimated on both signals over the same frames.
pub fn evaluate(name: &str, reference: &Waveform<f64>, test: &Waveform<f64>, config: &EvalConfig) -> Result<EvalReport> {
    if reference.sample_rate_hz != test.sample_rate_hz {
        return Err(Error::InvalidArgument(format!(
            "sample rates differ: {} vs {}",
            reference.sample_rate_hz, test.sample_rate_hz
        )));
    }
    let sr = reference.sample_rate_hz;
    let probe = FrameGrid::from_ms(sr, config.frame_ms, config.shift_ms, 0)?;
    let n = common_length(reference.len(), test.len(), probe.frame_len)?;
    let grid = FrameGrid::from_ms(sr, config.frame_ms, config.shift_ms, n)?;
    let a = &reference.samples[..n];
    let b = &test.samples[..n];
    let distances = frame_lsd(a, b, &grid, config.fft_size)?;
    let f0 = config.f0_config();
    let ref_prosody = estimate_f0(a, &grid, sr, &f0);
    let test_prosody = estimate_f0(b, &grid, sr, &f0);
    let voicing: Vec<bool> = ref_prosody.iter().map(|p| p.voiced).collect();
    let regions = region_lsd(&distances, &voicing)?;
    let (f0_rmse_hz, both_voiced_frames) = f0_rmse(&ref_prosody, &test_prosody)?;
    Ok(EvalReport {
        name: name.to_string(),
        lsd_db: distances.iter().sum::<f64>() / distances.len() as f64,
        lsd_voiced_db: regions.voiced_db,
        lsd_uv_transition_db: regions.uv_transition_db,
        f0_rmse_hz,
        frames: distances.len(),
        voiced_frames: regions.voiced_frames,
        uv_transition_frames: regions.uv_transition_frames,
        both_voiced_frames,
    })
}

fn weighted(items: impl Iterator<Item = (Option<f64>, usize)>) -> Option<f64> {
    let (sum, n) = items
        .filter_map(|(v, n)| v.map(|v| (v, n)))
        .fold((0.0, 0usize), |(s, t), (v, n)| (s + v * n as f64, t + n));
    (n > 0).then(|| sum / n as f64)
}

/// Pools utterance reports: LSDs are frame-weighted means over each
/// region's frames, F0 RMSE is the root of the frame-weighted mean square.
pub fn aggregate(name: &str, reports: &[EvalReport]) -> Result<EvalReport> {
    if reports.is_empty() {
        return Err(Error::Empty("reports to aggregate"));
    }
    let lsd_db = weighted(reports.iter().map(|r| (Some(r.lsd_db), r.frames))).unwrap_or(0.0);
    Ok(EvalReport {
        name: name.to_string(),
        lsd_db,
        lsd_voiced_db: weighted(reports.iter().map(|r| (r.lsd_voiced_db, r.voiced_frames))),
        lsd_uv_transition_db: weighted(
            reports
                .iter()
                .map(|r| (r.lsd_uv_transition_db, r.uv_transition_frames)),
        ),
        f0_rmse_hz: weighted(
            reports
                .iter()
                .map(|r| (r.f0_rmse_hz.map(|v| v * v), r.both_voiced_frames)),
        )
        .map(f64::sqrt),
        frames: reports.iter().map(|r| r.frames).sum(),
        voiced_frames: reports.iter().map(|r| r.voiced_frames).sum(),
        uv_transition_frames: reports.iter().map(|r| r.uv_transition_frames).sum(),
        both_voiced_frames: reports.iter().map(|r| r.both_voiced_frames).sum(),
    })
}

/// Plain-text table, one row per report.
pub fn render_table(reports: &[EvalReport]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    let header = ["utterance", "frames", "LSD (dB)", "LSD V (dB)", "LSD UV+T (dB)", "F0 RMSE (Hz)"];
    let rows: Vec<[String; 6]> = reports
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                r.frames.to_string(),
                format!("{:.3}", r.lsd_db),
                cell(r.lsd_voiced_db),
                cell(r.lsd_uv_transition_db),
                cell(r.f0_rmse_hz),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..6)
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for r in &rows {
        line(r.iter().map(String::as_str).collect());
    }
    out
}
