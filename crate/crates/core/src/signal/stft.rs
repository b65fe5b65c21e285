use ndarray::{Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{Spectrogram, StftConfig, Waveform};

/// Short-time Fourier transform of a multichannel waveform.
///
/// Frames are laid out without centering: frame `m` covers samples
/// `[m*hop, m*hop + window)`, so `frames = (num_samples - window)/hop + 1`.
pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let frames = cfg.num_frames(w.num_samples()).ok_or_else(|| {
        Error::invalid_input(format!(
            "signal of {} samples is shorter than one window ({})",
            w.num_samples(),
            cfg.window_length
        ))
    })?;

    let win = cfg.window.samples(cfg.window_length);
    let n_fft = cfg.window_length;
    let bins = cfg.freq_bins();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n_fft);

    let mut out = Array3::zeros((w.channels(), frames, bins));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    for c in 0..w.channels() {
        let chan = w.channel(c);
        for m in 0..frames {
            let start = m * cfg.hop_length;
            for i in 0..n_fft {
                buf[i] = Complex64::new(chan[start + i] * win[i], 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..bins {
                out[(c, m, k)] = buf[k];
            }
        }
    }

    Ok(Spectrogram::from_parts(out, *cfg, w.sample_rate()))
}

/// Inverse STFT via weighted overlap-add with the analysis window reused for
/// synthesis. Each output sample is normalized by the local squared-window
/// sum, which makes the round trip exact wherever that sum is nonzero.
pub fn istft(s: &Spectrogram) -> Result<Waveform> {
    let cfg = *s.config();
    cfg.validate()?;
    let n_fft = cfg.window_length;
    let bins = cfg.freq_bins();
    let frames = s.frames();
    let out_len = cfg.synthesis_length(frames);

    let win = cfg.window.samples(n_fft);
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n_fft);

    let mut out = Array2::zeros((s.channels(), out_len));
    let mut norm = vec![0.0f64; out_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let mut scratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];

    for c in 0..s.channels() {
        if c == 0 {
            // Squared-window sum is channel-independent; fill once.
            for m in 0..frames {
                let start = m * cfg.hop_length;
                for i in 0..n_fft {
                    norm[start + i] += win[i] * win[i];
                }
            }
        }
        for m in 0..frames {
            // Rebuild the full spectrum from the one-sided half.
            for k in 0..bins {
                buf[k] = s.bins[(c, m, k)];
            }
            for k in bins..n_fft {
                buf[k] = s.bins[(c, m, n_fft - k)].conj();
            }
            ifft.process_with_scratch(&mut buf, &mut scratch);
            let start = m * cfg.hop_length;
            let scale = 1.0 / n_fft as f64;
            for i in 0..n_fft {
                out[(c, start + i)] += buf[i].re * scale * win[i];
            }
        }
    }

    for c in 0..s.channels() {
        for (i, &n) in norm.iter().enumerate() {
            if n > 1e-10 {
                out[(c, i)] /= n;
            }
        }
    }

    Ok(Waveform::from_parts(out, s.sample_rate()))
}

/// Per-channel elementwise product of spectrogram bins with a mask slice.
pub fn apply_mask(s: &Spectrogram, mask: ArrayView2<'_, f64>) -> Result<Spectrogram> {
    if mask.shape() != [s.frames(), s.freq_bins()] {
        return Err(Error::ShapeMismatch {
            expected: format!("mask {} x {}", s.frames(), s.freq_bins()),
            actual: format!("{} x {}", mask.shape()[0], mask.shape()[1]),
        });
    }
    let mut bins = s.bins().clone();
    for mut chan in bins.axis_iter_mut(Axis(0)) {
        chan.zip_mut_with(&mask, |v, &m| *v *= m);
    }
    Ok(Spectrogram::from_parts(bins, *s.config(), s.sample_rate()))
}
