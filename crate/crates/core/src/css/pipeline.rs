//! Block-wise CSS orchestration: estimate, align, stitch, then separate by
//! mask multiplication (single-channel) or MVDR beamforming (multi-channel).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::css::beamform::{beamform, compute_scm, mvdr_weights};
use crate::css::estimator::MaskEstimator;
use crate::css::stitch::{align_adjacent, stitch, AlignedBlock};
use crate::error::{Error, Result};
use crate::signal::{apply_mask, istft, stft, MaskSet, StftConfig, Waveform};

/// Whether streams are produced by mask multiplication or beamforming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CssMode {
    SingleChannel,
    MultiChannel,
}

/// Block-wise separation parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CssConfig {
    /// Frames per block (about 2.4 s at the default STFT resolution).
    pub segment_frames: usize,
    /// Frames shared by adjacent blocks.
    pub overlap_frames: usize,
    /// Output stream count N.
    pub num_streams: usize,
    pub mode: CssMode,
    /// Relative ridge added to the interference SCM before inversion.
    pub diagonal_loading: f64,
    /// Channel the MVDR weights are steered to and the channel whose
    /// magnitude drives block alignment.
    pub reference_channel: usize,
}

impl Default for CssConfig {
    fn default() -> Self {
        Self {
            segment_frames: 150,
            overlap_frames: 75,
            num_streams: 3,
            mode: CssMode::SingleChannel,
            diagonal_loading: 1e-6,
            reference_channel: 0,
        }
    }
}

impl CssConfig {
    pub fn validate(&self) -> Result<()> {
        if self.overlap_frames == 0 || self.overlap_frames >= self.segment_frames {
            return Err(Error::config(format!(
                "overlap {} must lie strictly between 0 and segment {}",
                self.overlap_frames, self.segment_frames
            )));
        }
        if self.overlap_frames > self.segment_frames - self.overlap_frames {
            return Err(Error::config(
                "overlap may not exceed half the segment; frames would be covered by three blocks",
            ));
        }
        if self.num_streams < 2 {
            return Err(Error::config("CSS needs at least two output streams"));
        }
        if self.diagonal_loading < 0.0 {
            return Err(Error::config("diagonal loading must be nonnegative"));
        }
        Ok(())
    }

    fn hop(&self) -> usize {
        self.segment_frames - self.overlap_frames
    }
}

/// Block boundaries and the permutation applied to each block, written as a
/// JSON sidecar next to the separated streams.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CssDebug {
    pub block_start_frames: Vec<usize>,
    /// `permutations[k][i]` is the original mask index that became stream `i`
    /// in block `k`.
    pub permutations: Vec<Vec<usize>>,
    /// Count of (frequency, stream) pairs whose MVDR weights were degenerate.
    pub degenerate_mvdr_bins: usize,
}

/// Separated streams plus stitching diagnostics.
#[derive(Debug, Clone)]
pub struct CssOutput {
    pub streams: Vec<Waveform>,
    pub debug: CssDebug,
}

/// Runs the full CSS chain on an unsegmented mixture and returns exactly
/// `cfg.num_streams` waveforms, each as long as the input.
pub fn css_pipeline(
    mixture: &Waveform,
    estimator: &dyn MaskEstimator,
    cfg: &CssConfig,
    stft_cfg: &StftConfig,
) -> Result<CssOutput> {
    cfg.validate()?;
    match cfg.mode {
        CssMode::SingleChannel if mixture.channels() != 1 => {
            return Err(Error::config(format!(
                "single-channel mode requires 1 channel, got {}",
                mixture.channels()
            )));
        }
        CssMode::MultiChannel if mixture.channels() < 2 => {
            return Err(Error::config(
                "multi-channel mode requires at least 2 channels",
            ));
        }
        _ => {}
    }
    if estimator.num_streams() != cfg.num_streams {
        return Err(Error::invalid_input(format!(
            "estimator produces {} streams, config expects {}",
            estimator.num_streams(),
            cfg.num_streams
        )));
    }
    if cfg.reference_channel >= mixture.channels() {
        return Err(Error::config(format!(
            "reference channel {} out of range ({} channels)",
            cfg.reference_channel,
            mixture.channels()
        )));
    }

    let spec = stft(mixture, stft_cfg)?;
    let total_frames = spec.frames();
    let starts = block_starts(total_frames, cfg.segment_frames, cfg.hop());
    let ref_mag = spec.magnitude(cfg.reference_channel);

    // Estimate and chain-align blocks left to right.
    let mut aligned: Vec<AlignedBlock> = Vec::with_capacity(starts.len());
    let mut permutations = Vec::with_capacity(starts.len());
    for (k, &start) in starts.iter().enumerate() {
        let end = (start + cfg.segment_frames).min(total_frames);
        let block_spec = spec.slice_frames(start, end);
        let masks = estimator.estimate(&block_spec, start)?;
        if masks.num_streams() != cfg.num_streams
            || masks.frames() != end - start
            || masks.freq_bins() != spec.freq_bins()
        {
            return Err(Error::invalid_input(format!(
                "estimator returned masks {} x {} x {}, expected {} x {} x {}",
                masks.num_streams(),
                masks.frames(),
                masks.freq_bins(),
                cfg.num_streams,
                end - start,
                spec.freq_bins()
            )));
        }
        if k == 0 {
            permutations.push((0..cfg.num_streams).collect());
            aligned.push(AlignedBlock { masks, start_frame: start });
        } else {
            let prev = &aligned[k - 1];
            let prev_end = prev.start_frame + prev.masks.frames();
            let ov_start = start;
            let ov_end = prev_end.min(end);
            let prev_ov = prev
                .masks
                .slice_frames(ov_start - prev.start_frame, ov_end - prev.start_frame);
            let next_ov = masks.slice_frames(0, ov_end - start);
            let ov_mag = ref_mag.slice(ndarray::s![ov_start..ov_end, ..]).to_owned();
            let perm = align_adjacent(&prev_ov, &next_ov, &ov_mag)?;
            aligned.push(AlignedBlock {
                masks: masks.permute_speech(&perm)?,
                start_frame: start,
            });
            permutations.push(perm);
        }
    }

    let stitched = stitch(&aligned)?;
    let mut degenerate_mvdr_bins = 0usize;

    let mut streams = Vec::with_capacity(cfg.num_streams);
    for i in 0..cfg.num_streams {
        let separated_spec = match cfg.mode {
            CssMode::SingleChannel => apply_mask(&spec, stitched.speech_mask(i))?,
            CssMode::MultiChannel => {
                let target = compute_scm(&spec, stitched.speech_mask(i))?;
                let interference_mask = stitched.interference_mask(i);
                let interference = compute_scm(&spec, interference_mask.view())?;
                let weights = mvdr_weights(
                    &target,
                    &interference,
                    cfg.reference_channel,
                    cfg.diagonal_loading,
                )?;
                degenerate_mvdr_bins +=
                    weights.degenerate().iter().filter(|&&d| d).count();
                beamform(&spec, &weights)?
            }
        };
        let wave = istft(&separated_spec)?;
        streams.push(fit_length(&wave, mixture.num_samples()));
    }

    Ok(CssOutput {
        streams,
        debug: CssDebug {
            block_start_frames: starts,
            permutations,
            degenerate_mvdr_bins,
        },
    })
}

/// Block start frames tiling `total` frames at a uniform `hop` stride. The
/// final block is allowed to be shorter than `segment` so no frame is ever
/// covered by more than two blocks.
fn block_starts(total: usize, segment: usize, hop: usize) -> Vec<usize> {
    if total <= segment {
        return vec![0];
    }
    let mut starts = Vec::new();
    let mut s = 0;
    while s + segment < total {
        starts.push(s);
        s += hop;
    }
    starts.push(s);
    starts
}

/// Zero-pads or truncates a mono waveform to `len` samples.
fn fit_length(w: &Waveform, len: usize) -> Waveform {
    let mut samples = Array2::zeros((w.channels(), len));
    let copy = w.num_samples().min(len);
    samples
        .slice_mut(ndarray::s![.., ..copy])
        .assign(&w.samples().slice(ndarray::s![.., ..copy]));
    Waveform::from_parts(samples, w.sample_rate())
}
