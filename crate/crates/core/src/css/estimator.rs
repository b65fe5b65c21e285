//! The mask-estimation seam and the ground-truth oracle that stands in for a
//! trained separation network.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::signal::{stft, MaskSet, Spectrogram, StftConfig, Waveform};
use crate::simulator::SupervisionBundle;

/// Caller-supplied source of time-frequency masks.
///
/// `segment` is one block of the mixture spectrogram and `start_frame` its
/// absolute frame offset, which lets supervised estimators look up aligned
/// reference material. Implementations must be safe for concurrent calls.
pub trait MaskEstimator: Sync {
    /// Number of speech streams the estimator produces.
    fn num_streams(&self) -> usize;

    /// Estimates masks for one block. The returned set must have
    /// [`MaskEstimator::num_streams`] speech masks and exactly the segment's
    /// frame count.
    fn estimate(&self, segment: &Spectrogram, start_frame: usize) -> Result<MaskSet>;
}

/// Ideal-ratio-mask oracle computed from known mixture components:
/// `m_i = |S_i| / (sum_j |S_j| + |S_noise| + eps)` per bin, with the
/// speakers' direct+early parts as targets and everything else as noise.
pub struct OracleIrmEstimator {
    masks: MaskSet,
}

/// Denominator guard against 0/0 in silent regions.
const IRM_EPSILON: f64 = 1e-10;

impl OracleIrmEstimator {
    /// Builds the oracle from target components and a residual (everything
    /// that is not a target). Magnitudes are taken from channel 0.
    pub fn new(targets: &[Waveform], residual: &Waveform, cfg: &StftConfig) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid_input("oracle needs at least one target"));
        }
        for t in targets {
            t.check_compatible(residual)?;
            if t.num_samples() != residual.num_samples() {
                return Err(Error::invalid_input(
                    "oracle components must share one length",
                ));
            }
        }
        let target_mags: Vec<Array2<f64>> = targets
            .iter()
            .map(|t| Ok(stft(t, cfg)?.magnitude(0)))
            .collect::<Result<_>>()?;
        let residual_mag = stft(residual, cfg)?.magnitude(0);

        let frames = residual_mag.nrows();
        let bins = residual_mag.ncols();
        let mut denom = residual_mag.clone();
        denom += IRM_EPSILON;
        for mag in &target_mags {
            denom += mag;
        }

        let mut speech = Array3::zeros((targets.len(), frames, bins));
        for (i, mag) in target_mags.iter().enumerate() {
            for t in 0..frames {
                for f in 0..bins {
                    speech[(i, t, f)] = mag[(t, f)] / denom[(t, f)];
                }
            }
        }
        let mut noise = Array2::zeros((frames, bins));
        for t in 0..frames {
            for f in 0..bins {
                noise[(t, f)] = residual_mag[(t, f)] / denom[(t, f)];
            }
        }

        Ok(Self {
            masks: MaskSet::new(speech, noise)?,
        })
    }

    /// Oracle for a simulated bundle: targets are the per-speaker
    /// direct+early components; the residual is noise plus all late reverb.
    /// When the bundle has fewer speakers than `num_streams`, the spare
    /// streams get all-zero masks.
    pub fn from_bundle(
        bundle: &SupervisionBundle,
        cfg: &StftConfig,
        num_streams: usize,
    ) -> Result<Self> {
        if bundle.direct_early.len() > num_streams {
            return Err(Error::invalid_input(format!(
                "bundle has {} speakers but CSS produces {} streams",
                bundle.direct_early.len(),
                num_streams
            )));
        }
        let mut residual = bundle.noise.samples().clone();
        for r in &bundle.reverb {
            residual += r.samples();
        }
        let residual = Waveform::new(residual, bundle.noise.sample_rate())?;
        let oracle = Self::new(&bundle.direct_early, &residual, cfg)?;

        if bundle.direct_early.len() == num_streams {
            return Ok(oracle);
        }
        let frames = oracle.masks.frames();
        let bins = oracle.masks.freq_bins();
        let mut speech = Array3::zeros((num_streams, frames, bins));
        speech
            .slice_mut(ndarray::s![..bundle.direct_early.len(), .., ..])
            .assign(oracle.masks.speech());
        Ok(Self {
            masks: MaskSet::new(speech, oracle.masks.noise_mask().clone())?,
        })
    }

    /// Full-length oracle masks, mostly useful for inspection and tests.
    pub fn full_masks(&self) -> &MaskSet {
        &self.masks
    }
}

impl MaskEstimator for OracleIrmEstimator {
    fn num_streams(&self) -> usize {
        self.masks.num_streams()
    }

    fn estimate(&self, segment: &Spectrogram, start_frame: usize) -> Result<MaskSet> {
        let end = start_frame + segment.frames();
        if end > self.masks.frames() {
            return Err(Error::invalid_input(format!(
                "segment frames {start_frame}..{end} exceed oracle length {}",
                self.masks.frames()
            )));
        }
        Ok(self.masks.slice_frames(start_frame, end))
    }
}
