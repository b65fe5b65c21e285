//! Percentile-bootstrap confidence intervals over per-meeting rates. Each
//! meeting is treated as one i.i.d. unit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub low: f64,
    pub high: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CiConfig {
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for CiConfig {
    fn default() -> Self {
        Self {
            level: 0.95,
            resamples: 10_000,
            seed: 0,
        }
    }
}

/// Percentile bootstrap over per-meeting rates. Deterministic under a fixed
/// seed; needs at least two meetings.
pub fn confidence_interval(
    rates: &[f64],
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapCi> {
    if rates.len() < 2 {
        return Err(Error::invalid_input(
            "confidence interval needs at least two meetings",
        ));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::invalid_input("confidence level must lie in (0, 1)"));
    }
    if resamples == 0 {
        return Err(Error::invalid_input("need at least one resample"));
    }
    let n = rates.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += rates[rng.gen_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        low: percentile(&means, alpha),
        high: percentile(&means, 1.0 - alpha),
        mean: rates.iter().sum::<f64>() / n as f64,
    })
}

/// Bootstrap over paired per-meeting differences `system - baseline`. The
/// two lists must cover exactly the same meetings.
pub fn relative_ci(
    system: &[(String, f64)],
    baseline: &[(String, f64)],
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapCi> {
    let sys: BTreeMap<&str, f64> = system.iter().map(|(id, r)| (id.as_str(), *r)).collect();
    let base: BTreeMap<&str, f64> = baseline.iter().map(|(id, r)| (id.as_str(), *r)).collect();
    if sys.len() != system.len() || base.len() != baseline.len() {
        return Err(Error::MismatchedMeetings("duplicate meeting ids".into()));
    }
    if sys.len() != base.len() || sys.keys().ne(base.keys()) {
        let missing: Vec<&str> = sys
            .keys()
            .filter(|k| !base.contains_key(*k))
            .chain(base.keys().filter(|k| !sys.contains_key(*k)))
            .copied()
            .collect();
        return Err(Error::MismatchedMeetings(missing.join(", ")));
    }
    let diffs: Vec<f64> = sys.iter().map(|(id, r)| r - base[id]).collect();
    confidence_interval(&diffs, level, resamples, seed)
}

/// Linear-interpolation percentile of sorted values, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
