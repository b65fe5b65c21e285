//! Time/frequency-domain primitives: waveforms, STFT analysis/synthesis,
//! masks and mask application.

mod mask;
mod stft;
pub mod wav;

pub use mask::MaskSet;
pub use stft::{apply_mask, istft, stft};

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nominal processing rate of the whole toolkit.
pub const SAMPLE_RATE: u32 = 16_000;

/// Multichannel time-domain audio, `channels x num_samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Array2<f64>,
    sample_rate: u32,
}

impl Waveform {
    /// Builds a waveform, validating finiteness and shape invariants.
    pub fn new(samples: Array2<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid_input("sample_rate must be positive"));
        }
        if samples.nrows() == 0 {
            return Err(Error::invalid_input("waveform needs at least one channel"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_input("waveform contains non-finite samples"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Internal constructor for samples already known to be finite.
    pub(crate) fn from_parts(samples: Array2<f64>, sample_rate: u32) -> Self {
        debug_assert!(samples.nrows() >= 1);
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn from_mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let n = samples.len();
        let arr = Array2::from_shape_vec((1, n), samples)
            .expect("mono shape is always consistent");
        Self::new(arr, sample_rate)
    }

    pub fn zeros(channels: usize, num_samples: usize, sample_rate: u32) -> Self {
        assert!(channels >= 1, "waveform needs at least one channel");
        Self::from_parts(Array2::zeros((channels, num_samples)), sample_rate)
    }

    pub fn channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.samples.ncols()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_s(&self) -> f64 {
        self.num_samples() as f64 / self.sample_rate as f64
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn channel(&self, c: usize) -> ArrayView1<'_, f64> {
        self.samples.row(c)
    }

    /// Extracts one channel as a mono waveform.
    pub fn mono_channel(&self, c: usize) -> Result<Waveform> {
        if c >= self.channels() {
            return Err(Error::invalid_input(format!(
                "channel {c} out of range ({} channels)",
                self.channels()
            )));
        }
        Ok(Self::from_parts(
            self.samples.row(c).to_owned().insert_axis(ndarray::Axis(0)),
            self.sample_rate,
        ))
    }

    /// Sum of squared samples over all channels.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    /// Checks that two waveforms can be combined by an operation.
    pub fn check_compatible(&self, other: &Waveform) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::SampleRateMismatch(self.sample_rate, other.sample_rate));
        }
        Ok(())
    }
}

/// Analysis window shape. Analysis and synthesis use the same window; the
/// inverse transform normalizes by the per-sample squared-window sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Square-root of a periodic Hann window; self-dual COLA pair at 50% hop.
    SqrtHann,
    /// Periodic Hann window.
    Hann,
}

impl WindowKind {
    pub fn samples(self, length: usize) -> Vec<f64> {
        let n = length as f64;
        (0..length)
            .map(|i| {
                let hann = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n).cos();
                match self {
                    WindowKind::SqrtHann => hann.sqrt(),
                    WindowKind::Hann => hann,
                }
            })
            .collect()
    }
}

/// STFT framing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop_length: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    /// 32 ms window, 50% hop, sqrt-Hann pair: the separation default at 16 kHz.
    fn default() -> Self {
        Self {
            window_length: 512,
            hop_length: 256,
            window: WindowKind::SqrtHann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_length == 0 || self.hop_length == 0 {
            return Err(Error::invalid_input("window and hop must be positive"));
        }
        if self.window_length % self.hop_length != 0 {
            return Err(Error::invalid_input(format!(
                "hop {} must divide window {}",
                self.hop_length, self.window_length
            )));
        }
        // Perfect reconstruction needs the squared-window overlap-add sum to
        // stay bounded away from zero over one hop period.
        let w = self.window.samples(self.window_length);
        let overlaps = self.window_length / self.hop_length;
        for n in 0..self.hop_length {
            let mut acc = 0.0;
            for m in 0..overlaps {
                let idx = n + m * self.hop_length;
                acc += w[idx] * w[idx];
            }
            if acc < 1e-6 {
                return Err(Error::invalid_input(
                    "window/hop pair does not satisfy the reconstruction condition",
                ));
            }
        }
        Ok(())
    }

    pub fn freq_bins(&self) -> usize {
        self.window_length / 2 + 1
    }

    /// Frame count produced by an analysis pass over `num_samples`.
    pub fn num_frames(&self, num_samples: usize) -> Option<usize> {
        if num_samples < self.window_length {
            None
        } else {
            Some((num_samples - self.window_length) / self.hop_length + 1)
        }
    }

    /// Time-domain length synthesized from `frames` frames.
    pub fn synthesis_length(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            (frames - 1) * self.hop_length + self.window_length
        }
    }
}

/// Complex STFT representation, `channels x frames x frequency_bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub(crate) bins: ndarray::Array3<Complex64>,
    config: StftConfig,
    sample_rate: u32,
}

impl Spectrogram {
    pub fn new(
        bins: ndarray::Array3<Complex64>,
        config: StftConfig,
        sample_rate: u32,
    ) -> Result<Self> {
        if bins.shape()[2] != config.freq_bins() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} frequency bins", config.freq_bins()),
                actual: format!("{}", bins.shape()[2]),
            });
        }
        if bins.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid_input("spectrogram contains non-finite bins"));
        }
        Ok(Self {
            bins,
            config,
            sample_rate,
        })
    }

    pub(crate) fn from_parts(
        bins: ndarray::Array3<Complex64>,
        config: StftConfig,
        sample_rate: u32,
    ) -> Self {
        Self {
            bins,
            config,
            sample_rate,
        }
    }

    pub fn bins(&self) -> &ndarray::Array3<Complex64> {
        &self.bins
    }

    pub fn channels(&self) -> usize {
        self.bins.shape()[0]
    }

    pub fn frames(&self) -> usize {
        self.bins.shape()[1]
    }

    pub fn freq_bins(&self) -> usize {
        self.bins.shape()[2]
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Magnitude spectrogram of one channel, `frames x frequency_bins`.
    pub fn magnitude(&self, channel: usize) -> Array2<f64> {
        self.bins
            .index_axis(ndarray::Axis(0), channel)
            .mapv(|v| v.norm())
    }

    /// Frame-range slice sharing the config; used for block-wise processing.
    pub fn slice_frames(&self, start: usize, end: usize) -> Spectrogram {
        let view = self
            .bins
            .slice(ndarray::s![.., start..end, ..])
            .to_owned();
        Self::from_parts(view, self.config, self.sample_rate)
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|v| v.norm_sqr()).sum()
    }
}
