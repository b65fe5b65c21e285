//! WAV reading and writing: PCM 16-bit integer and 32-bit float, mono or
//! multichannel, at the toolkit's 16 kHz processing rate.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::signal::{Waveform, SAMPLE_RATE};

/// Reads a WAV file into a waveform, preserving stored channel order.
/// Rates other than 16 kHz are rejected; resampling is out of scope.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let mut reader = hound::WavReader::open(path.as_ref())?;
    let spec = reader.spec();
    if spec.sample_rate != SAMPLE_RATE {
        return Err(Error::UnsupportedSampleRate(spec.sample_rate));
    }
    let channels = spec.channels as usize;

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from).map_err(Error::from))
            .collect::<Result<_>>()?,
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0).map_err(Error::from))
            .collect::<Result<_>>()?,
        (fmt, bits) => {
            return Err(Error::UnsupportedWavFormat(format!(
                "{fmt:?} at {bits} bits (supported: PCM16, float32)"
            )))
        }
    };

    let num_samples = interleaved.len() / channels;
    let mut samples = Array2::zeros((channels, num_samples));
    for (i, v) in interleaved.iter().enumerate() {
        samples[(i % channels, i / channels)] = *v;
    }
    Waveform::new(samples, spec.sample_rate)
}

/// Writes a waveform as 32-bit float WAV.
pub fn write_wav_f32(path: impl AsRef<Path>, w: &Waveform) -> Result<()> {
    let spec = hound::WavSpec {
        channels: w.channels() as u16,
        sample_rate: w.sample_rate(),
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec)?;
    for i in 0..w.num_samples() {
        for c in 0..w.channels() {
            writer.write_sample(w.samples()[(c, i)] as f32)?;
        }
    }
    writer.finalize()?;
    Ok(())
}

/// Writes a waveform as 16-bit PCM WAV, clipping to full scale.
pub fn write_wav_i16(path: impl AsRef<Path>, w: &Waveform) -> Result<()> {
    let spec = hound::WavSpec {
        channels: w.channels() as u16,
        sample_rate: w.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec)?;
    for i in 0..w.num_samples() {
        for c in 0..w.channels() {
            let v = (w.samples()[(c, i)] * 32768.0).clamp(-32768.0, 32767.0);
            writer.write_sample(v as i16)?;
        }
    }
    writer.finalize()?;
    Ok(())
}
