use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::error::{Error, Result};

/// N speech masks plus one noise mask over STFT frames, the central CSS
/// currency. Every value lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    speech: Array3<f64>,
    noise: Array2<f64>,
}

impl MaskSet {
    /// Builds a mask set. Values outside `[0, 1]` coming from external
    /// estimators are clamped with a warning; non-finite values are rejected.
    pub fn new(speech: Array3<f64>, noise: Array2<f64>) -> Result<Self> {
        if speech.shape()[0] == 0 {
            return Err(Error::invalid_input("mask set needs at least one speech mask"));
        }
        if speech.shape()[1] != noise.shape()[0] || speech.shape()[2] != noise.shape()[1] {
            return Err(Error::ShapeMismatch {
                expected: format!("noise mask {} x {}", speech.shape()[1], speech.shape()[2]),
                actual: format!("{} x {}", noise.shape()[0], noise.shape()[1]),
            });
        }
        if speech.iter().chain(noise.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid_input("mask contains non-finite values"));
        }
        let mut speech = speech;
        let mut noise = noise;
        let mut clamped = 0usize;
        for v in speech.iter_mut().chain(noise.iter_mut()) {
            if *v < 0.0 || *v > 1.0 {
                *v = v.clamp(0.0, 1.0);
                clamped += 1;
            }
        }
        if clamped > 0 {
            log::warn!("clamped {clamped} mask values outside [0, 1]");
        }
        Ok(Self { speech, noise })
    }

    pub fn num_streams(&self) -> usize {
        self.speech.shape()[0]
    }

    pub fn frames(&self) -> usize {
        self.speech.shape()[1]
    }

    pub fn freq_bins(&self) -> usize {
        self.speech.shape()[2]
    }

    pub fn speech(&self) -> &Array3<f64> {
        &self.speech
    }

    pub fn speech_mask(&self, stream: usize) -> ArrayView2<'_, f64> {
        self.speech.index_axis(Axis(0), stream)
    }

    pub fn noise_mask(&self) -> &Array2<f64> {
        &self.noise
    }

    /// Frame-range slice of all masks.
    pub fn slice_frames(&self, start: usize, end: usize) -> MaskSet {
        Self {
            speech: self.speech.slice(ndarray::s![.., start..end, ..]).to_owned(),
            noise: self.noise.slice(ndarray::s![start..end, ..]).to_owned(),
        }
    }

    /// Reorders the speech masks so stream `i` becomes `self.speech[perm[i]]`.
    /// The noise mask never participates in permutations.
    pub fn permute_speech(&self, perm: &[usize]) -> Result<MaskSet> {
        let n = self.num_streams();
        if perm.len() != n {
            return Err(Error::invalid_input(format!(
                "permutation length {} does not match {} streams",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::invalid_input("not a permutation"));
            }
            seen[p] = true;
        }
        let mut speech = Array3::zeros(self.speech.raw_dim());
        for (i, &p) in perm.iter().enumerate() {
            speech
                .index_axis_mut(Axis(0), i)
                .assign(&self.speech.index_axis(Axis(0), p));
        }
        Ok(Self {
            speech,
            noise: self.noise.clone(),
        })
    }

    /// Mask for everything that is not stream `target`: sum of the other
    /// speech masks and the noise mask, clamped back into `[0, 1]`.
    pub fn interference_mask(&self, target: usize) -> Array2<f64> {
        let mut acc = self.noise.clone();
        for i in 0..self.num_streams() {
            if i != target {
                acc += &self.speech.index_axis(Axis(0), i);
            }
        }
        acc.mapv_inplace(|v| v.clamp(0.0, 1.0));
        acc
    }
}
