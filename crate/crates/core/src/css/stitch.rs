//! Permutation-invariant loss, adjacent-block alignment and mask stitching.

use ndarray::{Array2, Array3, ArrayView2};

use crate::error::{Error, Result};
use crate::signal::MaskSet;

/// All permutations of `0..n` in lexicographic order. Ties in permutation
/// searches are broken by taking the first minimum in this order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut result = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        result.push(current.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    result
}

/// Mean squared error between two masked magnitude spectrograms
/// `a * mag` and `b * mag`.
fn masked_mse(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, mag: &Array2<f64>) -> f64 {
    let n = a.len() as f64;
    a.iter()
        .zip(b.iter())
        .zip(mag.iter())
        .map(|((x, y), m)| {
            let d = (x - y) * m;
            d * d
        })
        .sum::<f64>()
        / n
}

/// Pairwise masked-magnitude MSE matrix `d[i][j]` between `a`'s speech mask i
/// and `b`'s speech mask j.
fn pairwise_mse(a: &MaskSet, b: &MaskSet, mag: &Array2<f64>) -> Vec<Vec<f64>> {
    let n = a.num_streams();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| masked_mse(a.speech_mask(i), b.speech_mask(j), mag))
                .collect()
        })
        .collect()
}

fn best_permutation(d: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = d.len();
    let mut best_perm = Vec::new();
    let mut best = f64::INFINITY;
    for perm in all_permutations(n) {
        let cost: f64 = perm.iter().enumerate().map(|(i, &j)| d[i][j]).sum();
        if cost < best {
            best = cost;
            best_perm = perm;
        }
    }
    (best_perm, best)
}

/// Permutation-invariant loss between estimated and reference mask sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PitOutcome {
    /// Minimal summed MSE over speech-mask permutations plus the (unpermuted)
    /// noise-mask MSE.
    pub loss: f64,
    /// `permutation[i]` is the reference index matched to estimate `i`.
    pub permutation: Vec<usize>,
}

/// Minimum over all stream permutations of the summed masked-magnitude MSE.
/// The noise mask is compared unpermuted and its MSE added to the loss.
pub fn pit_loss(
    estimated: &MaskSet,
    reference: &MaskSet,
    mixture_magnitude: &Array2<f64>,
) -> Result<PitOutcome> {
    check_same_shape(estimated, reference)?;
    check_magnitude_shape(estimated, mixture_magnitude)?;
    if mixture_magnitude.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid_input("mixture magnitude must be nonnegative"));
    }
    let d = pairwise_mse(estimated, reference, mixture_magnitude);
    let (permutation, speech_loss) = best_permutation(&d);
    let noise_loss = masked_mse(
        estimated.noise_mask().view(),
        reference.noise_mask().view(),
        mixture_magnitude,
    );
    Ok(PitOutcome {
        loss: speech_loss + noise_loss,
        permutation,
    })
}

/// Chooses the ordering of `next`'s speech masks that minimizes the masked
/// magnitude MSE against `prev` over the shared overlap frames. Both mask
/// sets and the magnitude must already be sliced to the overlap region.
/// The noise mask never participates in the permutation.
///
/// Returns `perm` such that `next.permute_speech(&perm)` lines up with `prev`.
pub fn align_adjacent(
    prev: &MaskSet,
    next: &MaskSet,
    overlap_magnitude: &Array2<f64>,
) -> Result<Vec<usize>> {
    if prev.frames() == 0 {
        return Err(Error::invalid_input("alignment requires a nonzero overlap"));
    }
    check_same_shape(prev, next)?;
    check_magnitude_shape(prev, overlap_magnitude)?;
    let d = pairwise_mse(prev, next, overlap_magnitude);
    Ok(best_permutation(&d).0)
}

/// One permutation-aligned block together with its absolute start frame.
#[derive(Debug, Clone)]
pub struct AlignedBlock {
    pub masks: MaskSet,
    pub start_frame: usize,
}

impl AlignedBlock {
    fn end_frame(&self) -> usize {
        self.start_frame + self.masks.frames()
    }
}

/// Stitches permutation-aligned blocks into full-length masks. Overlap
/// regions between adjacent blocks are blended with a linear crossfade;
/// everything else is copied verbatim.
pub fn stitch(blocks: &[AlignedBlock]) -> Result<MaskSet> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::invalid_input("stitch needs at least one block"))?;
    if first.start_frame != 0 {
        return Err(Error::invalid_input("first block must start at frame 0"));
    }
    let n = first.masks.num_streams();
    let bins = first.masks.freq_bins();
    for pair in blocks.windows(2) {
        if pair[1].masks.num_streams() != n || pair[1].masks.freq_bins() != bins {
            return Err(Error::invalid_input("blocks disagree on stream count or bins"));
        }
        if pair[1].start_frame <= pair[0].start_frame {
            return Err(Error::invalid_input("block starts must be strictly increasing"));
        }
        if pair[1].start_frame > pair[0].end_frame() {
            return Err(Error::invalid_input(format!(
                "gap between blocks: frame {} to {}",
                pair[0].end_frame(),
                pair[1].start_frame
            )));
        }
    }
    for triple in blocks.windows(3) {
        if triple[2].start_frame < triple[0].end_frame() {
            return Err(Error::invalid_input(
                "more than two blocks cover one frame; reduce the overlap",
            ));
        }
    }

    let total = blocks.last().unwrap().end_frame();
    let mut speech = Array3::zeros((n, total, bins));
    let mut noise = Array2::zeros((total, bins));

    let copy_frame = |speech: &mut Array3<f64>,
                      noise: &mut Array2<f64>,
                      block: &AlignedBlock,
                      local: usize,
                      out: usize| {
        for i in 0..n {
            for f in 0..bins {
                speech[(i, out, f)] = block.masks.speech()[(i, local, f)];
            }
        }
        for f in 0..bins {
            noise[(out, f)] = block.masks.noise_mask()[(local, f)];
        }
    };

    for (k, block) in blocks.iter().enumerate() {
        let solo_start = if k == 0 {
            block.start_frame
        } else {
            blocks[k - 1].end_frame()
        };
        let solo_end = if k + 1 < blocks.len() {
            blocks[k + 1].start_frame.min(block.end_frame())
        } else {
            block.end_frame()
        };
        for t in solo_start..solo_end {
            copy_frame(&mut speech, &mut noise, block, t - block.start_frame, t);
        }
        if k + 1 < blocks.len() {
            let next = &blocks[k + 1];
            let ov_start = next.start_frame;
            let ov_end = block.end_frame();
            let v = ov_end - ov_start;
            for j in 0..v {
                let alpha = if v == 1 {
                    0.5
                } else {
                    j as f64 / (v - 1) as f64
                };
                let t = ov_start + j;
                let pl = t - block.start_frame;
                let nl = t - next.start_frame;
                for i in 0..n {
                    for f in 0..bins {
                        speech[(i, t, f)] = (1.0 - alpha) * block.masks.speech()[(i, pl, f)]
                            + alpha * next.masks.speech()[(i, nl, f)];
                    }
                }
                for f in 0..bins {
                    noise[(t, f)] = (1.0 - alpha) * block.masks.noise_mask()[(pl, f)]
                        + alpha * next.masks.noise_mask()[(nl, f)];
                }
            }
        }
    }

    MaskSet::new(speech, noise)
}

fn check_same_shape(a: &MaskSet, b: &MaskSet) -> Result<()> {
    if a.num_streams() != b.num_streams()
        || a.frames() != b.frames()
        || a.freq_bins() != b.freq_bins()
    {
        return Err(Error::ShapeMismatch {
            expected: format!("{} x {} x {}", a.num_streams(), a.frames(), a.freq_bins()),
            actual: format!("{} x {} x {}", b.num_streams(), b.frames(), b.freq_bins()),
        });
    }
    Ok(())
}

fn check_magnitude_shape(m: &MaskSet, mag: &Array2<f64>) -> Result<()> {
    if mag.shape() != [m.frames(), m.freq_bins()] {
        return Err(Error::ShapeMismatch {
            expected: format!("magnitude {} x {}", m.frames(), m.freq_bins()),
            actual: format!("{} x {}", mag.shape()[0], mag.shape()[1]),
        });
    }
    Ok(())
}
