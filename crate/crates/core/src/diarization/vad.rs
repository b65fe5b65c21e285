//! Energy-based voice activity detection, the recipe's front gate for
//! embedding windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Waveform;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VadConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    /// Threshold relative to the peak frame power, in dB.
    pub threshold_db: f64,
    /// Active runs separated by less than this are merged into one interval.
    pub hangover_ms: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            hop_ms: 10.0,
            threshold_db: -40.0,
            hangover_ms: 300.0,
        }
    }
}

/// Speech intervals `(start_s, end_s)` of a mono stream. Silent input (zero
/// peak power) yields no activity.
pub fn detect_activity(stream: &Waveform, cfg: &VadConfig) -> Result<Vec<(f64, f64)>> {
    if stream.channels() != 1 {
        return Err(Error::invalid_input("voice activity detection expects mono"));
    }
    let sr = f64::from(stream.sample_rate());
    let frame = (cfg.frame_ms * sr / 1000.0).round() as usize;
    let hop = (cfg.hop_ms * sr / 1000.0).round() as usize;
    if frame == 0 || hop == 0 {
        return Err(Error::invalid_input("frame and hop must be at least one sample"));
    }
    let n = stream.num_samples();
    if n < frame {
        return Ok(Vec::new());
    }
    let chan = stream.channel(0);
    let num_frames = (n - frame) / hop + 1;
    let powers: Vec<f64> = (0..num_frames)
        .map(|i| {
            chan.slice(ndarray::s![i * hop..i * hop + frame])
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

    let hangover = cfg.hangover_ms / 1000.0;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=num_frames {
        let active = i < num_frames && powers[i] >= threshold;
        match (active, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let start = s as f64 * hop as f64 / sr;
                let end = ((i - 1) * hop + frame) as f64 / sr;
                match intervals.last_mut() {
                    Some(last) if start - last.1 < hangover => last.1 = end,
                    _ => intervals.push((start, end)),
                }
                run_start = None;
            }
            _ => {}
        }
    }
    Ok(intervals)
}
