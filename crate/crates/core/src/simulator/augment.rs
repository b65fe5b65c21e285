//! Clean-speech augmentation: pause detection and random silence insertion,
//! plus the MOS upper-quartile corpus filter.

use std::path::PathBuf;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Waveform;

/// One clean-speech source with its subjective quality score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub path: PathBuf,
    pub speaker_id: String,
    pub mos_score: f64,
    pub duration_s: f64,
}

impl UtteranceRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.mos_score.is_finite() {
            return Err(Error::invalid_input("MOS score must be finite"));
        }
        if self.duration_s <= 0.0 {
            return Err(Error::invalid_input("utterance duration must be positive"));
        }
        Ok(())
    }
}

/// Frame parameters for power-drop pause detection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PauseConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    /// Threshold relative to the peak frame power, in dB.
    pub threshold_db: f64,
    pub min_pause_ms: f64,
}

impl Default for PauseConfig {
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            hop_ms: 10.0,
            threshold_db: -30.0,
            min_pause_ms: 150.0,
        }
    }
}

/// Finds drops in speech power. Each contiguous run of frames below the
/// relative threshold that lasts at least `min_pause_ms` yields one midpoint,
/// returned as a sample index in ascending order. All-silent input has zero
/// peak power and, by the guard rule, no pauses.
pub fn detect_pauses(speech: &Waveform, cfg: &PauseConfig) -> Result<Vec<usize>> {
    if speech.channels() != 1 {
        return Err(Error::invalid_input("pause detection expects mono speech"));
    }
    let sr = f64::from(speech.sample_rate());
    let frame = (cfg.frame_ms * sr / 1000.0).round() as usize;
    let hop = (cfg.hop_ms * sr / 1000.0).round() as usize;
    if frame == 0 || hop == 0 {
        return Err(Error::invalid_input("frame and hop must be at least one sample"));
    }
    let chan = speech.channel(0);
    let n = speech.num_samples();
    if n < frame {
        return Ok(Vec::new());
    }
    let num_frames = (n - frame) / hop + 1;
    let powers: Vec<f64> = (0..num_frames)
        .map(|i| {
            let start = i * hop;
            chan.slice(ndarray::s![start..start + frame])
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                / frame as f64
        })
        .collect();
    let peak = powers.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Ok(Vec::new());
    }
    let threshold = peak * 10f64.powf(cfg.threshold_db / 10.0);

    let mut pauses = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=num_frames {
        let below = i < num_frames && powers[i] < threshold;
        match (below, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let last = i - 1;
                let duration_ms = ((last - s) * hop + frame) as f64 * 1000.0 / sr;
                if duration_ms >= cfg.min_pause_ms {
                    pauses.push((s * hop + last * hop + frame) / 2);
                }
                run_start = None;
            }
            _ => {}
        }
    }
    Ok(pauses)
}

/// Inserts a silence of uniform random length at each pause point with the
/// given probability. Deterministic under a fixed seed; the output length is
/// the input length plus everything inserted.
pub fn insert_silences(
    speech: &Waveform,
    pause_points: &[usize],
    seed: u64,
    min_gap_s: f64,
    max_gap_s: f64,
    probability: f64,
) -> Result<Waveform> {
    if speech.channels() != 1 {
        return Err(Error::invalid_input("silence insertion expects mono speech"));
    }
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::invalid_input("probability must lie in [0, 1]"));
    }
    if min_gap_s < 0.0 || max_gap_s < min_gap_s {
        return Err(Error::invalid_input("need 0 <= min_gap <= max_gap"));
    }
    let n = speech.num_samples();
    if pause_points.iter().any(|&p| p > n) {
        return Err(Error::invalid_input("pause point outside signal bounds"));
    }
    let mut points = pause_points.to_vec();
    points.sort_unstable();

    let sr = f64::from(speech.sample_rate());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaps: Vec<(usize, usize)> = Vec::new();
    for &p in &points {
        if rng.gen::<f64>() < probability {
            let gap_s = if max_gap_s > min_gap_s {
                rng.gen_range(min_gap_s..=max_gap_s)
            } else {
                min_gap_s
            };
            gaps.push((p, (gap_s * sr).round() as usize));
        }
    }
    if gaps.is_empty() {
        return Ok(speech.clone());
    }

    let total: usize = gaps.iter().map(|(_, g)| g).sum();
    let mut out = Array2::zeros((1, n + total));
    let chan = speech.channel(0);
    let mut src = 0usize;
    let mut dst = 0usize;
    for &(p, g) in &gaps {
        let span = p - src;
        out.slice_mut(ndarray::s![0, dst..dst + span])
            .assign(&chan.slice(ndarray::s![src..p]));
        src = p;
        dst += span + g;
    }
    out.slice_mut(ndarray::s![0, dst..])
        .assign(&chan.slice(ndarray::s![src..]));
    Ok(Waveform::from_parts(out, speech.sample_rate()))
}

/// Keeps the records whose MOS score reaches the 75th percentile
/// (linear-interpolation definition) of the input scores. Input order is
/// preserved.
pub fn mos_quartile_filter(records: &[UtteranceRecord]) -> Result<Vec<UtteranceRecord>> {
    if records.is_empty() {
        return Err(Error::invalid_input("MOS filter needs at least one record"));
    }
    for r in records {
        r.validate()?;
    }
    let mut scores: Vec<f64> = records.iter().map(|r| r.mos_score).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = 0.75 * (scores.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(scores.len() - 1);
    let frac = rank - lo as f64;
    let threshold = scores[lo] + frac * (scores[hi] - scores[lo]);

    Ok(records
        .iter()
        .filter(|r| r.mos_score >= threshold)
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(speaker: &str, mos: f64) -> UtteranceRecord {
        UtteranceRecord {
            path: PathBuf::from(format!("{speaker}.wav")),
            speaker_id: speaker.into(),
            mos_score: mos,
            duration_s: 40.0,
        }
    }

    #[test]
    fn constant_tone_has_no_pauses() {
        let samples: Vec<f64> = (0..32_000)
            .map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 16_000.0).sin())
            .collect();
        let w = Waveform::from_mono(samples, 16_000).unwrap();
        assert!(detect_pauses(&w, &PauseConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn two_bursts_yield_one_midpoint() {
        // 1 s tone, 0.5 s silence, 1 s tone: pause midpoint ~1.25 s.
        let sr = 16_000usize;
        let mut samples = vec![0.0; (2.5 * sr as f64) as usize];
        for (i, s) in samples.iter_mut().enumerate() {
            let t = i as f64 / sr as f64;
            if t < 1.0 || t >= 1.5 {
                *s = (2.0 * std::f64::consts::PI * 440.0 * t).sin() * 0.5;
            }
        }
        let w = Waveform::from_mono(samples, sr as u32).unwrap();
        let pauses = detect_pauses(&w, &PauseConfig::default()).unwrap();
        assert_eq!(pauses.len(), 1);
        let frame = 0.025;
        let midpoint_s = pauses[0] as f64 / sr as f64;
        assert!(
            (midpoint_s - 1.25).abs() <= frame,
            "midpoint at {midpoint_s} s"
        );
    }

    #[test]
    fn silence_input_guard() {
        let w = Waveform::zeros(1, 16_000, 16_000);
        assert!(detect_pauses(&w, &PauseConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn zero_probability_is_identity() {
        let w = Waveform::from_mono((0..1000).map(|i| i as f64 / 1000.0).collect(), 16_000)
            .unwrap();
        let out = insert_silences(&w, &[100, 500], 42, 0.2, 2.0, 0.0).unwrap();
        assert_eq!(out.samples(), w.samples());
    }

    #[test]
    fn forced_insertion_adds_exact_gap() {
        let w = Waveform::from_mono((0..1000).map(|i| (i % 7) as f64 * 0.1).collect(), 16_000)
            .unwrap();
        let out = insert_silences(&w, &[400], 42, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(out.num_samples(), 1000 + 16_000);
        for i in 0..400 {
            assert_eq!(out.channel(0)[i], w.channel(0)[i]);
        }
        for i in 400..400 + 16_000 {
            assert_eq!(out.channel(0)[i], 0.0);
        }
        for i in 400..1000 {
            assert_eq!(out.channel(0)[i + 16_000], w.channel(0)[i]);
        }
    }

    #[test]
    fn insertion_is_deterministic() {
        let w = Waveform::from_mono((0..5000).map(|i| (i as f64).sin()).collect(), 16_000)
            .unwrap();
        let a = insert_silences(&w, &[500, 2500, 4000], 7, 0.2, 2.0, 0.5).unwrap();
        let b = insert_silences(&w, &[500, 2500, 4000], 7, 0.2, 2.0, 0.5).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn out_of_bounds_point_rejected() {
        let w = Waveform::zeros(1, 100, 16_000);
        assert!(insert_silences(&w, &[101], 0, 0.1, 0.2, 1.0).is_err());
    }

    #[test]
    fn quartile_filter_linear_interpolation() {
        let records: Vec<_> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .enumerate()
            .map(|(i, &m)| record(&format!("s{i}"), m))
            .collect();
        // 75th percentile of {1,2,3,4} by linear interpolation is 3.25.
        let kept = mos_quartile_filter(&records).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].mos_score, 4.0);
    }

    #[test]
    fn quartile_filter_ties_and_singletons() {
        let equal: Vec<_> = (0..5).map(|i| record(&format!("s{i}"), 3.3)).collect();
        assert_eq!(mos_quartile_filter(&equal).unwrap().len(), 5);
        let single = vec![record("solo", 1.0)];
        assert_eq!(mos_quartile_filter(&single).unwrap().len(), 1);
        assert!(mos_quartile_filter(&[]).is_err());
    }

    #[test]
    fn quartile_filter_preserves_order() {
        let records = vec![record("a", 4.0), record("b", 1.0), record("c", 4.5)];
        let kept = mos_quartile_filter(&records).unwrap();
        let ids: Vec<_> = kept.iter().map(|r| r.speaker_id.as_str()).collect();
        // threshold = 4.0 + 0.5*(4.5-4.0) = 4.25 -> only "c".
        assert_eq!(ids, vec!["c"]);
    }
}
