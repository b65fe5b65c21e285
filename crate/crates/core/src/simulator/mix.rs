//! Component convolution and 3-speaker meeting mixing with the full
//! supervision decomposition: per-speaker direct+early, per-speaker late
//! reverb, and a noise floor that together sum exactly to the mixture.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::Waveform;
use crate::simulator::rir::RirSplit;

/// Default SNR draw range for the noise floor, in dB against summed speech.
pub const SNR_RANGE_DB: (f64, f64) = (5.0, 25.0);

/// Full linear convolution via FFT, output length `n + m - 1`.
pub(crate) fn fft_convolve(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
    if signal.is_empty() || kernel.is_empty() {
        return Vec::new();
    }
    let out_len = signal.len() + kernel.len() - 1;
    let fft_len = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(fft_len);
    let ifft = planner.plan_fft_inverse(fft_len);

    let mut a: Vec<Complex64> = signal
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(fft_len)
        .collect();
    let mut b: Vec<Complex64> = kernel
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(fft_len)
        .collect();
    fft.process(&mut a);
    fft.process(&mut b);
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= y;
    }
    ifft.process(&mut a);
    let scale = 1.0 / fft_len as f64;
    a[..out_len].iter().map(|v| v.re * scale).collect()
}

/// One speaker's in-room signal split into its supervision components.
#[derive(Debug, Clone)]
pub struct ConvolvedUtterance {
    pub direct_early: Waveform,
    pub reverb: Waveform,
}

/// Convolves mono speech with both parts of a split RIR. Output channel
/// count follows the RIR; length is the full convolution
/// `speech + taps - 1`. By linearity the two outputs sum to the full-RIR
/// convolution.
pub fn convolve_components(speech: &Waveform, split: &RirSplit) -> Result<ConvolvedUtterance> {
    if speech.channels() != 1 {
        return Err(Error::invalid_input("convolution expects mono speech"));
    }
    let channels = split.direct_early.nrows();
    let taps = split.direct_early.ncols();
    let out_len = speech.num_samples() + taps - 1;
    let sig: Vec<f64> = speech.channel(0).to_vec();

    let mut direct = Array2::zeros((channels, out_len));
    let mut reverb = Array2::zeros((channels, out_len));
    for c in 0..channels {
        let de = fft_convolve(&sig, split.direct_early.row(c).as_slice().unwrap());
        let lt = fft_convolve(&sig, split.late.row(c).as_slice().unwrap());
        for (i, v) in de.into_iter().enumerate() {
            direct[(c, i)] = v;
        }
        for (i, v) in lt.into_iter().enumerate() {
            reverb[(c, i)] = v;
        }
    }
    Ok(ConvolvedUtterance {
        direct_early: Waveform::from_parts(direct, speech.sample_rate()),
        reverb: Waveform::from_parts(reverb, speech.sample_rate()),
    })
}

/// A simulated mixture with its supervision signals. The decomposition
/// `mixture(t) = sum_i [direct_early_i(t) + reverb_i(t)] + noise(t)` holds
/// exactly: the mixture is materialized as that very sum.
#[derive(Debug, Clone)]
pub struct SupervisionBundle {
    pub mixture: Waveform,
    pub direct_early: Vec<Waveform>,
    pub reverb: Vec<Waveform>,
    pub noise: Waveform,
    pub speaker_offsets_s: Vec<f64>,
    pub snr_db: f64,
}

impl SupervisionBundle {
    pub fn num_speakers(&self) -> usize {
        self.direct_early.len()
    }

    /// Maximum absolute deviation of the mixture from the component sum.
    pub fn identity_error(&self) -> f64 {
        let mut acc = self.noise.samples().clone();
        for w in self.direct_early.iter().chain(self.reverb.iter()) {
            acc += w.samples();
        }
        acc -= self.mixture.samples();
        acc.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Offsets each speaker's components by its shift, scales noise to a random
/// SNR drawn from `snr_range_db`, and sums everything into a mixture.
/// Deterministic under a fixed seed. Zero-energy speech or noise skips the
/// SNR scaling so degenerate inputs pass through unchanged.
pub fn mix_meeting(
    speakers: &[ConvolvedUtterance],
    noise: &Waveform,
    shifts_s: &[f64],
    seed: u64,
    snr_range_db: (f64, f64),
) -> Result<SupervisionBundle> {
    if speakers.is_empty() {
        return Err(Error::invalid_input("mixing needs at least one speaker"));
    }
    if shifts_s.len() != speakers.len() {
        return Err(Error::invalid_input("one shift per speaker required"));
    }
    if shifts_s.iter().any(|&s| s < 0.0) {
        return Err(Error::invalid_input("shifts must be nonnegative"));
    }
    let sr = noise.sample_rate();
    let channels = noise.channels();
    for s in speakers {
        s.direct_early.check_compatible(noise)?;
        s.reverb.check_compatible(noise)?;
        if s.direct_early.channels() != channels || s.reverb.channels() != channels {
            return Err(Error::invalid_input("channel counts disagree"));
        }
        if s.direct_early.num_samples() != s.reverb.num_samples() {
            return Err(Error::invalid_input(
                "direct+early and reverb components must share one length",
            ));
        }
    }

    let shift_samples: Vec<usize> = shifts_s
        .iter()
        .map(|&s| (s * f64::from(sr)).round() as usize)
        .collect();
    let length = speakers
        .iter()
        .zip(&shift_samples)
        .map(|(s, &off)| off + s.direct_early.num_samples())
        .max()
        .unwrap();

    let place = |w: &Waveform, off: usize| -> Array2<f64> {
        let mut out = Array2::zeros((channels, length));
        out.slice_mut(ndarray::s![.., off..off + w.num_samples()])
            .assign(w.samples());
        out
    };

    let direct_early: Vec<Array2<f64>> = speakers
        .iter()
        .zip(&shift_samples)
        .map(|(s, &off)| place(&s.direct_early, off))
        .collect();
    let reverb: Vec<Array2<f64>> = speakers
        .iter()
        .zip(&shift_samples)
        .map(|(s, &off)| place(&s.reverb, off))
        .collect();

    // Tile or truncate the noise to the mixture length.
    let mut noise_full = Array2::zeros((channels, length));
    let n = noise.num_samples();
    if n > 0 {
        for i in 0..length {
            for c in 0..channels {
                noise_full[(c, i)] = noise.samples()[(c, i % n)];
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let snr_db = if snr_range_db.1 > snr_range_db.0 {
        rng.gen_range(snr_range_db.0..=snr_range_db.1)
    } else {
        snr_range_db.0
    };
    let speech_power: f64 = direct_early
        .iter()
        .zip(reverb.iter())
        .map(|(d, r)| d.iter().zip(r.iter()).map(|(a, b)| (a + b).powi(2)).sum::<f64>())
        .sum();
    let noise_power: f64 = noise_full.iter().map(|v| v * v).sum();
    if speech_power > 0.0 && noise_power > 0.0 {
        let scale = (speech_power / (noise_power * 10f64.powf(snr_db / 10.0))).sqrt();
        noise_full.mapv_inplace(|v| v * scale);
    }

    let mut mixture = noise_full.clone();
    for (d, r) in direct_early.iter().zip(reverb.iter()) {
        mixture += d;
        mixture += r;
    }

    Ok(SupervisionBundle {
        mixture: Waveform::from_parts(mixture, sr),
        direct_early: direct_early
            .into_iter()
            .map(|a| Waveform::from_parts(a, sr))
            .collect(),
        reverb: reverb
            .into_iter()
            .map(|a| Waveform::from_parts(a, sr))
            .collect(),
        noise: Waveform::from_parts(noise_full, sr),
        speaker_offsets_s: shifts_s.to_vec(),
        snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::rir::{split_rir, Rir};

    fn random_wave(channels: usize, len: usize, seed: u64) -> Waveform {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Waveform::new(
            Array2::from_shape_fn((channels, len), |_| rng.gen_range(-0.5..0.5)),
            16_000,
        )
        .unwrap()
    }

    #[test]
    fn direct_convolution_oracle() {
        // Independent oracle: O(n*m) time-domain convolution.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sig: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ker: Vec<f64> = (0..37).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = fft_convolve(&sig, &ker);
        let mut slow = vec![0.0; sig.len() + ker.len() - 1];
        for (i, &s) in sig.iter().enumerate() {
            for (j, &k) in ker.iter().enumerate() {
                slow[i + j] += s * k;
            }
        }
        assert_eq!(fast.len(), slow.len());
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn impulse_rir_passes_speech_through() {
        let mut resp = Array2::zeros((1, 64));
        resp[(0, 0)] = 1.0;
        let rir = Rir::new(resp, "r".into(), "p".into()).unwrap();
        let split = split_rir(&rir, 50.0, 8.0).unwrap();
        let speech = random_wave(1, 500, 2);
        let out = convolve_components(&speech, &split).unwrap();
        for i in 0..500 {
            assert!((out.direct_early.channel(0)[i] - speech.channel(0)[i]).abs() < 1e-12);
        }
        assert!(out.reverb.samples().iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn unit_impulse_speech_recovers_rir_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let resp = Array2::from_shape_fn((2, 900), |_| rng.gen_range(-1.0..1.0));
        let rir = Rir::new(resp, "r".into(), "p".into()).unwrap();
        let split = split_rir(&rir, 30.0, 8.0).unwrap();
        let mut pulse = vec![0.0; 1];
        pulse[0] = 1.0;
        let speech = Waveform::from_mono(pulse, 16_000).unwrap();
        let out = convolve_components(&speech, &split).unwrap();
        for c in 0..2 {
            for t in 0..900 {
                assert!((out.direct_early.samples()[(c, t)] - split.direct_early[(c, t)]).abs() < 1e-10);
                assert!((out.reverb.samples()[(c, t)] - split.late[(c, t)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn component_sum_equals_full_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let resp = Array2::from_shape_fn((7, 1200), |_| rng.gen_range(-0.3..0.3));
        let rir = Rir::new(resp.clone(), "r".into(), "p".into()).unwrap();
        let split = split_rir(&rir, 50.0, 8.0).unwrap();
        let speech = random_wave(1, 4000, 5);
        let out = convolve_components(&speech, &split).unwrap();
        let sig: Vec<f64> = speech.channel(0).to_vec();
        for c in 0..7 {
            let full = fft_convolve(&sig, resp.row(c).as_slice().unwrap());
            for (t, &v) in full.iter().enumerate() {
                let sum = out.direct_early.samples()[(c, t)] + out.reverb.samples()[(c, t)];
                assert!((sum - v).abs() < 1e-9, "channel {c} sample {t}");
            }
        }
    }

    fn convolved(channels: usize, len: usize, seed: u64) -> ConvolvedUtterance {
        ConvolvedUtterance {
            direct_early: random_wave(channels, len, seed),
            reverb: random_wave(channels, len, seed + 1000),
        }
    }

    #[test]
    fn single_speaker_no_noise() {
        let spk = convolved(1, 1000, 10);
        let silence = Waveform::zeros(1, 1000, 16_000);
        let bundle = mix_meeting(&[spk.clone()], &silence, &[0.0], 1, SNR_RANGE_DB).unwrap();
        let expect = spk.direct_early.samples() + spk.reverb.samples();
        assert_eq!(bundle.mixture.samples(), &expect);
        assert_eq!(bundle.identity_error(), 0.0);
    }

    #[test]
    fn three_speakers_identity_and_length() {
        let speakers: Vec<_> = (0..3).map(|i| convolved(2, 800 + i * 100, 20 + i as u64)).collect();
        let noise = random_wave(2, 300, 30);
        let shifts = [0.0, 0.05, 0.11];
        let bundle = mix_meeting(&speakers, &noise, &shifts, 2, SNR_RANGE_DB).unwrap();
        let expected_len = (0.11f64 * 16_000.0).round() as usize + 1000;
        assert_eq!(bundle.mixture.num_samples(), expected_len);
        assert!(bundle.identity_error() < 1e-9);
        assert!(bundle.snr_db >= 5.0 && bundle.snr_db <= 25.0);
    }

    #[test]
    fn zero_speech_passes_noise_through() {
        let spk = ConvolvedUtterance {
            direct_early: Waveform::zeros(1, 500, 16_000),
            reverb: Waveform::zeros(1, 500, 16_000),
        };
        let noise = random_wave(1, 500, 40);
        let bundle = mix_meeting(&[spk], &noise, &[0.0], 3, SNR_RANGE_DB).unwrap();
        assert_eq!(bundle.mixture.samples(), noise.samples());
    }

    #[test]
    fn mixing_is_deterministic() {
        let speakers: Vec<_> = (0..2).map(|i| convolved(1, 600, 50 + i as u64)).collect();
        let noise = random_wave(1, 200, 60);
        let a = mix_meeting(&speakers, &noise, &[0.0, 0.02], 7, SNR_RANGE_DB).unwrap();
        let b = mix_meeting(&speakers, &noise, &[0.0, 0.02], 7, SNR_RANGE_DB).unwrap();
        assert_eq!(a.mixture.samples(), b.mixture.samples());
        assert_eq!(a.snr_db, b.snr_db);
    }

    #[test]
    fn empty_speakers_rejected() {
        let noise = random_wave(1, 100, 70);
        assert!(mix_meeting(&[], &noise, &[], 0, SNR_RANGE_DB).is_err());
    }
}
