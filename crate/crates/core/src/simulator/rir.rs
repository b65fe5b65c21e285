//! Room-impulse-response handling: the 50 ms direct+early / late split and
//! reverberation-time estimation from the Schroeder decay curve.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::signal::SAMPLE_RATE;

/// A measured room impulse response at 16 kHz, `channels x taps`. The array
/// geometry is either 7 channels (one central, six surrounding) or 1.
#[derive(Debug, Clone)]
pub struct Rir {
    pub response: Array2<f64>,
    pub room_id: String,
    pub position_id: String,
}

impl Rir {
    pub fn new(response: Array2<f64>, room_id: String, position_id: String) -> Result<Self> {
        if response.ncols() == 0 || response.nrows() == 0 {
            return Err(Error::invalid_input("RIR needs at least one channel and tap"));
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_input("RIR contains non-finite taps"));
        }
        Ok(Self {
            response,
            room_id,
            position_id,
        })
    }

    pub fn channels(&self) -> usize {
        self.response.nrows()
    }

    pub fn taps(&self) -> usize {
        self.response.ncols()
    }
}

/// Complementary decomposition of a RIR at the 50 ms mark. The parts sum to
/// the original response exactly.
#[derive(Debug, Clone)]
pub struct RirSplit {
    pub direct_early: Array2<f64>,
    pub late: Array2<f64>,
    pub cutoff_ms: f64,
    pub transition_ms: f64,
    /// Peak tap of channel 0, the time origin of the cutoff.
    pub peak_tap: usize,
}

/// Splits a RIR into direct+early and late parts with a raised-cosine fade of
/// width `transition_ms` centered on `cutoff_ms`. Time is measured from the
/// global peak tap of channel 0. The late part is computed as the residual
/// `response - direct_early`, so the two parts reconstruct the input exactly.
pub fn split_rir(r: &Rir, cutoff_ms: f64, transition_ms: f64) -> Result<RirSplit> {
    if cutoff_ms <= 0.0 || transition_ms < 0.0 {
        return Err(Error::invalid_input("cutoff must be positive, transition nonnegative"));
    }
    if transition_ms > 2.0 * cutoff_ms {
        return Err(Error::invalid_input(
            "transition width may not exceed twice the cutoff",
        ));
    }
    let peak_tap = r
        .response
        .row(0)
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
        .map(|(i, _)| i)
        .ok_or_else(|| Error::invalid_input("all-zero RIR has no peak tap"))?;

    let ms_per_tap = 1000.0 / f64::from(SAMPLE_RATE);
    let fade_start = cutoff_ms - transition_ms / 2.0;
    let fade_end = cutoff_ms + transition_ms / 2.0;

    let mut direct_early = r.response.clone();
    for mut row in direct_early.rows_mut() {
        for (t, v) in row.iter_mut().enumerate() {
            let t_ms = (t as f64 - peak_tap as f64) * ms_per_tap;
            let w = if t_ms <= fade_start {
                1.0
            } else if t_ms >= fade_end || transition_ms == 0.0 {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * (t_ms - fade_start) / transition_ms).cos())
            };
            *v *= w;
        }
    }
    let late = &r.response - &direct_early;

    Ok(RirSplit {
        direct_early,
        late,
        cutoff_ms,
        transition_ms,
        peak_tap,
    })
}

/// RT60 from the Schroeder backward-integrated energy decay curve of channel
/// 0: a least-squares line is fitted between -5 dB and -35 dB (the T30
/// range) and extrapolated to a 60 dB decay.
pub fn estimate_rt60(r: &Rir) -> Result<f64> {
    let chan = r.response.row(0);
    let energies: Vec<f64> = chan.iter().map(|v| v * v).collect();

    // Backward integration.
    let mut edc = vec![0.0f64; energies.len()];
    let mut acc = 0.0;
    for t in (0..energies.len()).rev() {
        acc += energies[t];
        edc[t] = acc;
    }
    let total = edc[0];
    if total <= 0.0 {
        return Err(Error::invalid_input("all-zero RIR has no decay curve"));
    }

    let dt = 1.0 / f64::from(SAMPLE_RATE);
    let mut fit: Vec<(f64, f64)> = Vec::new();
    let mut started = false;
    for (t, &e) in edc.iter().enumerate() {
        if e <= 0.0 {
            break;
        }
        let db = 10.0 * (e / total).log10();
        if db > -5.0 {
            continue;
        }
        started = true;
        fit.push((t as f64 * dt, db));
        if db <= -35.0 {
            break;
        }
    }
    let reached_floor = fit.last().is_some_and(|(_, db)| *db <= -35.0);
    if !started || !reached_floor || fit.len() < 2 {
        return Err(Error::InsufficientDecayRange);
    }

    // Least-squares slope in dB per second.
    let n = fit.len() as f64;
    let sx: f64 = fit.iter().map(|(x, _)| x).sum();
    let sy: f64 = fit.iter().map(|(_, y)| y).sum();
    let sxx: f64 = fit.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = fit.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::InsufficientDecayRange);
    }
    let slope = (n * sxy - sx * sy) / denom;
    if slope >= 0.0 {
        return Err(Error::InsufficientDecayRange);
    }
    Ok(-60.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn impulse_rir(taps: usize, at: usize) -> Rir {
        let mut response = Array2::zeros((1, taps));
        response[(0, at)] = 1.0;
        Rir::new(response, "room".into(), "pos".into()).unwrap()
    }

    #[test]
    fn impulse_at_peak_is_all_direct() {
        let r = impulse_rir(2000, 100);
        let split = split_rir(&r, 50.0, 8.0).unwrap();
        assert_eq!(split.peak_tap, 100);
        assert_eq!(split.direct_early, r.response);
        assert!(split.late.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impulse_far_after_peak_is_all_late() {
        // Peak at tap 0 (value 1.0), a second tap 100 ms later.
        let mut response = Array2::zeros((1, 4000));
        response[(0, 0)] = 1.0;
        response[(0, 1600)] = 0.5;
        let r = Rir::new(response, "room".into(), "pos".into()).unwrap();
        let split = split_rir(&r, 50.0, 8.0).unwrap();
        assert_eq!(split.direct_early[(0, 0)], 1.0);
        assert_eq!(split.direct_early[(0, 1600)], 0.0);
        assert_eq!(split.late[(0, 1600)], 0.5);
    }

    #[test]
    fn tap_exactly_at_cutoff_splits_in_half() {
        let mut response = Array2::zeros((1, 4000));
        response[(0, 0)] = 1.0;
        response[(0, 800)] = 0.8; // 50 ms after the peak at 16 kHz
        let r = Rir::new(response, "room".into(), "pos".into()).unwrap();
        let split = split_rir(&r, 50.0, 8.0).unwrap();
        assert!((split.direct_early[(0, 800)] - 0.4).abs() < 1e-12);
        assert!((split.late[(0, 800)] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn split_reconstructs_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let taps = rng.gen_range(100..3000);
            let channels = if rng.gen_bool(0.5) { 7 } else { 1 };
            let response =
                Array2::from_shape_fn((channels, taps), |_| rng.gen_range(-1.0..1.0));
            let r = Rir::new(response.clone(), "r".into(), "p".into()).unwrap();
            let split = split_rir(&r, 50.0, 8.0).unwrap();
            let max_err = (&split.direct_early + &split.late - &response)
                .iter()
                .map(|v| v.abs())
                .fold(0.0f64, f64::max);
            assert!(max_err <= 1e-12);
        }
    }

    #[test]
    fn all_zero_rir_rejected() {
        let r = Rir::new(Array2::zeros((1, 100)), "r".into(), "p".into()).unwrap();
        assert!(split_rir(&r, 50.0, 8.0).is_err());
    }

    fn decaying_rir(t60: f64, len_s: f64, seed: u64) -> Rir {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = (len_s * 16_000.0) as usize;
        let rate = 3.0 * std::f64::consts::LN_10 / t60;
        let response = Array2::from_shape_fn((1, n), |(_, t)| {
            let time = t as f64 / 16_000.0;
            (-time * rate).exp() * rng.gen_range(-1.0..1.0f64)
        });
        Rir::new(response, "r".into(), "p".into()).unwrap()
    }

    #[test]
    fn rt60_recovers_synthetic_decay() {
        for &t60 in &[0.2, 0.4, 0.8] {
            let r = decaying_rir(t60, t60 * 3.0, 11);
            let est = estimate_rt60(&r).unwrap();
            assert!(
                (est - t60).abs() / t60 < 0.1,
                "T={t60}: estimated {est}"
            );
        }
    }

    #[test]
    fn rt60_scale_invariant() {
        let r = decaying_rir(0.4, 1.2, 12);
        let base = estimate_rt60(&r).unwrap();
        let scaled = Rir::new(&r.response * 37.5, "r".into(), "p".into()).unwrap();
        let est = estimate_rt60(&scaled).unwrap();
        assert!((est - base).abs() < 1e-9);
    }

    #[test]
    fn rt60_pure_impulse_errors() {
        let r = impulse_rir(1000, 0);
        assert!(matches!(estimate_rt60(&r), Err(Error::InsufficientDecayRange)));
    }

    #[test]
    fn rt60_insufficient_decay_errors() {
        // A non-decaying RIR of 1000 taps: the decay curve bottoms out at
        // 10*log10(1/1000) = -30 dB and never reaches -35 dB.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let response = Array2::from_shape_fn((1, 1000), |_| rng.gen_range(0.5..1.0f64));
        let r = Rir::new(response, "r".into(), "p".into()).unwrap();
        assert!(matches!(
            estimate_rt60(&r),
            Err(Error::InsufficientDecayRange)
        ));
    }
}
