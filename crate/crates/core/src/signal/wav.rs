use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::Waveform;
use crate::error::{Error, Result};
use crate::scalar::Real;

const PCM_SCALE: f64 = 32768.0;

/// Outcome of [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WriteReport {
    /// Samples whose magnitude exceeded 1.0 and were clipped.
    pub clipped: usize,
}

/// Reads a 16-bit PCM mono RIFF/WAVE file; amplitudes are `pcm / 32768`.
pub fn read_wav<T: Real>(path: impl AsRef<Path>) -> Result<Waveform<T>> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedAudio {
            path: path.to_path_buf(),
            message: format!(
                "expected 16-bit integer PCM, found {:?} with {} bits",
                spec.sample_format, spec.bits_per_sample
            ),
        });
    }
    if spec.channels != 1 {
        return Err(Error::UnsupportedAudio {
            path: path.to_path_buf(),
            message: format!("expected mono, found {} channels", spec.channels),
        });
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| T::of(v as f64 / PCM_SCALE)))
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| wav_error(path, e))?;
    Waveform::new(samples, spec.sample_rate)
}

/// Writes 16-bit PCM mono. Samples beyond [-1, 1] are clipped and counted.
pub fn write_wav<T: Real>(waveform: &Waveform<T>, path: impl AsRef<Path>) -> Result<WriteReport> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: waveform.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    let mut report = WriteReport::default();
    for (index, &s) in waveform.samples.iter().enumerate() {
        let x = s.to_f64_lossy();
        if !x.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if x.abs() > 1.0 {
            report.clipped += 1;
        }
        let pcm = (x.clamp(-1.0, 1.0) * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(pcm).map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))?;
    if report.clipped > 0 {
        log::warn!("{}: clipped {} samples", path.display(), report.clipped);
    }
    Ok(report)
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(source) => Error::io(path, source),
        hound::Error::Unsupported => Error::UnsupportedAudio {
            path: path.to_path_buf(),
            message: "unsupported wav encoding".into(),
        },
        other => Error::Wav {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}
