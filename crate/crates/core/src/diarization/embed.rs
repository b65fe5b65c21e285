//! The speaker-embedding seam, a DSP fallback embedder, and sliding-window
//! embedding extraction over voice activity.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::signal::{stft, StftConfig, Waveform};

/// Maps a short audio window to a fixed-dimension unit-norm vector.
/// Implementations must be safe for concurrent calls; neural embedders plug
/// in behind this trait.
pub trait SpeakerEmbedder: Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, window: &Waveform) -> Result<Vec<f64>>;
}

/// Log subband-energy embedder. A deterministic stand-in for a trained
/// speaker model: windows dominated by different spectral content land far
/// apart, which is enough for the clustering stage and the test oracles.
pub struct FilterbankEmbedder {
    bands: usize,
    stft: StftConfig,
}

impl FilterbankEmbedder {
    pub fn new(bands: usize) -> Self {
        Self {
            bands,
            stft: StftConfig::default(),
        }
    }
}

impl Default for FilterbankEmbedder {
    fn default() -> Self {
        Self::new(24)
    }
}

impl SpeakerEmbedder for FilterbankEmbedder {
    fn dimension(&self) -> usize {
        self.bands
    }

    fn embed(&self, window: &Waveform) -> Result<Vec<f64>> {
        if window.channels() != 1 {
            return Err(Error::invalid_input("embedder expects mono windows"));
        }
        // Pad very short windows up to one analysis frame.
        let padded;
        let wave = if window.num_samples() < self.stft.window_length {
            let mut samples = Array2::zeros((1, self.stft.window_length));
            samples
                .slice_mut(ndarray::s![.., ..window.num_samples()])
                .assign(window.samples());
            padded = Waveform::from_parts(samples, window.sample_rate());
            &padded
        } else {
            window
        };
        let spec = stft(wave, &self.stft)?;
        let bins = spec.freq_bins();
        // Gate out near-silent frames (30 dB below the loudest frame) so a
        // window that straddles a speech boundary embeds only its speech.
        let frame_power: Vec<f64> = (0..spec.frames())
            .map(|t| (0..bins).map(|f| spec.bins()[(0, t, f)].norm_sqr()).sum())
            .collect();
        let peak = frame_power.iter().cloned().fold(0.0f64, f64::max);
        let gate = peak * 1e-3;
        let kept: Vec<usize> = if peak > 0.0 {
            (0..spec.frames()).filter(|&t| frame_power[t] >= gate).collect()
        } else {
            (0..spec.frames()).collect()
        };
        let mut mean_power = vec![0.0f64; bins];
        for &t in &kept {
            for f in 0..bins {
                mean_power[f] += spec.bins()[(0, t, f)].norm_sqr();
            }
        }
        let frames = kept.len() as f64;
        let per_band = bins.div_ceil(self.bands);
        let mut v: Vec<f64> = (0..self.bands)
            .map(|b| {
                let lo = b * per_band;
                let hi = ((b + 1) * per_band).min(bins);
                let energy: f64 = mean_power[lo..hi.max(lo)].iter().sum::<f64>() / frames;
                (energy + 1e-12).ln()
            })
            .collect();
        // Center, then normalize; a zero vector falls back to uniform.
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        Ok(unit_norm(v))
    }
}

pub(crate) fn unit_norm(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-12 {
        v.iter_mut().for_each(|x| *x /= norm);
    } else {
        let uniform = 1.0 / (v.len() as f64).sqrt();
        v.iter_mut().for_each(|x| *x = uniform);
    }
    v
}

/// One embedded sliding window.
#[derive(Debug, Clone)]
pub struct WindowEmbedding {
    pub start_s: f64,
    pub end_s: f64,
    pub vector: Vec<f64>,
}

/// Slides `window_s`-long windows at `hop_s` over the stream and embeds the
/// ones that intersect speech activity; windows entirely outside activity
/// are skipped. Vectors are normalized to unit length.
pub fn window_embeddings(
    stream: &Waveform,
    embedder: &dyn SpeakerEmbedder,
    window_s: f64,
    hop_s: f64,
    activity: &[(f64, f64)],
) -> Result<Vec<WindowEmbedding>> {
    if !(hop_s > 0.0 && window_s >= hop_s) {
        return Err(Error::invalid_input("need window_s >= hop_s > 0"));
    }
    let sr = f64::from(stream.sample_rate());
    let win = (window_s * sr).round() as usize;
    let hop = (hop_s * sr).round() as usize;
    if win == 0 || win > stream.num_samples() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut start = 0usize;
    while start + win <= stream.num_samples() {
        let start_s = start as f64 / sr;
        let end_s = (start + win) as f64 / sr;
        let intersects = activity.iter().any(|&(a, b)| a < end_s && start_s < b);
        if intersects {
            let slice = stream
                .samples()
                .slice(ndarray::s![.., start..start + win])
                .to_owned();
            let window = Waveform::from_parts(slice, stream.sample_rate());
            let v = embedder.embed(&window)?;
            if v.len() != embedder.dimension() {
                return Err(Error::invalid_input(format!(
                    "embedder produced dimension {}, declared {}",
                    v.len(),
                    embedder.dimension()
                )));
            }
            out.push(WindowEmbedding {
                start_s,
                end_s,
                vector: unit_norm(v),
            });
        }
        start += hop;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct ConstEmbedder;

    impl SpeakerEmbedder for ConstEmbedder {
        fn dimension(&self) -> usize {
            4
        }
        fn embed(&self, _window: &Waveform) -> Result<Vec<f64>> {
            Ok(vec![2.0, 0.0, 0.0, 0.0])
        }
    }

    #[test]
    fn window_count_follows_formula() {
        let stream = Waveform::from_mono(vec![0.1; 160_000], 16_000).unwrap();
        let activity = vec![(0.0, 10.0)];
        let out = window_embeddings(&stream, &ConstEmbedder, 1.5, 0.75, &activity).unwrap();
        assert_eq!(out.len(), ((10.0f64 - 1.5) / 0.75).floor() as usize + 1);
        assert_eq!(out.len(), 12);
    }

    #[test]
    fn empty_activity_yields_no_windows() {
        let stream = Waveform::from_mono(vec![0.1; 32_000], 16_000).unwrap();
        let out = window_embeddings(&stream, &ConstEmbedder, 1.5, 0.75, &[]).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn vectors_are_unit_normalized() {
        let stream = Waveform::from_mono(vec![0.1; 32_000], 16_000).unwrap();
        let out = window_embeddings(&stream, &ConstEmbedder, 1.0, 1.0, &[(0.0, 2.0)]).unwrap();
        assert!(!out.is_empty());
        for w in &out {
            let norm: f64 = w.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
            assert_eq!(w.vector[0], 1.0);
        }
    }

    #[test]
    fn filterbank_separates_distinct_bands() {
        let sr = 16_000;
        let tone = |freq: f64| -> Waveform {
            Waveform::from_mono(
                (0..sr)
                    .map(|i| 0.4 * (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin())
                    .collect(),
                sr as u32,
            )
            .unwrap()
        };
        let e = FilterbankEmbedder::default();
        let low = e.embed(&tone(400.0)).unwrap();
        let low2 = e.embed(&tone(410.0)).unwrap();
        let high = e.embed(&tone(3500.0)).unwrap();
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        assert!(dot(&low, &low2) > 0.95, "nearby tones should agree");
        assert!(dot(&low, &high) < 0.6, "distant bands should disagree");
    }
}
