//! Mask-weighted spatial covariance matrices and MVDR beamforming.

use ndarray::{Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::Spectrogram;

/// Per-frequency Hermitian spatial covariance matrices,
/// `frequency_bins x channels x channels`.
#[derive(Debug, Clone)]
pub struct Scm {
    matrices: Array3<Complex64>,
    /// Frequencies whose mask weight summed to zero; their matrix is zero.
    degenerate: Vec<bool>,
}

impl Scm {
    pub fn matrices(&self) -> &Array3<Complex64> {
        &self.matrices
    }

    pub fn freq_bins(&self) -> usize {
        self.matrices.shape()[0]
    }

    pub fn channels(&self) -> usize {
        self.matrices.shape()[1]
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn matrix(&self, f: usize) -> ArrayView2<'_, Complex64> {
        self.matrices.index_axis(Axis(0), f)
    }
}

/// Mask-weighted spatial covariance per frequency:
/// `phi(f) = sum_t m(t,f) x(t,f) x(t,f)^H / sum_t m(t,f)`.
///
/// Frequencies where the mask sums to zero yield a zero matrix and are
/// flagged in [`Scm::degenerate`].
pub fn compute_scm(s: &Spectrogram, mask: ArrayView2<'_, f64>) -> Result<Scm> {
    if mask.shape() != [s.frames(), s.freq_bins()] {
        return Err(Error::ShapeMismatch {
            expected: format!("mask {} x {}", s.frames(), s.freq_bins()),
            actual: format!("{} x {}", mask.shape()[0], mask.shape()[1]),
        });
    }
    let ch = s.channels();
    let bins = s.freq_bins();
    let mut matrices = Array3::zeros((bins, ch, ch));
    let mut degenerate = vec![false; bins];

    for f in 0..bins {
        let mut weight = 0.0;
        for t in 0..s.frames() {
            let m = mask[(t, f)];
            if m == 0.0 {
                continue;
            }
            weight += m;
            for i in 0..ch {
                let xi = s.bins()[(i, t, f)];
                for j in 0..ch {
                    let xj = s.bins()[(j, t, f)];
                    matrices[(f, i, j)] += xi * xj.conj() * m;
                }
            }
        }
        if weight > 0.0 {
            let inv = Complex64::new(1.0 / weight, 0.0);
            for i in 0..ch {
                for j in 0..ch {
                    matrices[(f, i, j)] *= inv;
                }
            }
        } else {
            degenerate[f] = true;
        }
    }

    Ok(Scm { matrices, degenerate })
}

/// Gauss-Jordan inversion with partial pivoting. Returns `None` when the
/// matrix is numerically singular.
pub(crate) fn invert_matrix(m: ArrayView2<'_, Complex64>) -> Option<Array2<Complex64>> {
    let n = m.nrows();
    let mut a = m.to_owned();
    let mut inv = Array2::from_shape_fn((n, n), |(i, j)| {
        Complex64::new(f64::from(u8::from(i == j)), 0.0)
    });

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a_, &b_| {
                a[(a_, col)]
                    .norm()
                    .partial_cmp(&a[(b_, col)].norm())
                    .unwrap()
            })
            .unwrap();
        if a[(pivot_row, col)].norm() < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap((col, j), (pivot_row, j));
                inv.swap((col, j), (pivot_row, j));
            }
        }
        let pivot = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= pivot;
            inv[(col, j)] /= pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[(row, col)];
            if factor.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let acj = a[(col, j)];
                let icj = inv[(col, j)];
                a[(row, j)] -= factor * acj;
                inv[(row, j)] -= factor * icj;
            }
        }
    }
    Some(inv)
}

/// Per-frequency MVDR weight vectors, `frequency_bins x channels`.
#[derive(Debug, Clone)]
pub struct BeamformerWeights {
    weights: Array2<Complex64>,
    /// Frequencies where the trace normalization was numerically zero or the
    /// interference SCM could not be inverted; weights there are zero.
    degenerate: Vec<bool>,
}

impl BeamformerWeights {
    pub fn weights(&self) -> &Array2<Complex64> {
        &self.weights
    }

    pub fn channels(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn freq_bins(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }
}

/// Reference-channel MVDR:
/// `w(f) = [phi_int(f)^-1 phi_tgt(f) / trace(phi_int(f)^-1 phi_tgt(f))] e_ref`.
///
/// The interference SCM is ridge-regularized by
/// `loading * trace(phi_int) / channels * I` before inversion. A single
/// channel degenerates to the identity passthrough `w = 1`.
pub fn mvdr_weights(
    target: &Scm,
    interference: &Scm,
    ref_channel: usize,
    loading: f64,
) -> Result<BeamformerWeights> {
    if target.freq_bins() != interference.freq_bins()
        || target.channels() != interference.channels()
    {
        return Err(Error::ShapeMismatch {
            expected: format!("{} x {} SCMs", target.freq_bins(), target.channels()),
            actual: format!("{} x {}", interference.freq_bins(), interference.channels()),
        });
    }
    let ch = target.channels();
    if ref_channel >= ch {
        return Err(Error::invalid_input(format!(
            "reference channel {ref_channel} out of range ({ch} channels)"
        )));
    }
    let bins = target.freq_bins();
    let mut weights = Array2::zeros((bins, ch));
    let mut degenerate = vec![false; bins];

    if ch == 1 {
        for f in 0..bins {
            weights[(f, 0)] = Complex64::new(1.0, 0.0);
        }
        return Ok(BeamformerWeights { weights, degenerate });
    }

    for f in 0..bins {
        let phi_int = interference.matrix(f);
        let phi_tgt = target.matrix(f);

        let mut loaded = phi_int.to_owned();
        let trace_int: Complex64 = (0..ch).map(|i| phi_int[(i, i)]).sum();
        let ridge = loading * trace_int.re / ch as f64;
        for i in 0..ch {
            loaded[(i, i)] += Complex64::new(ridge, 0.0);
        }

        let Some(inv) = invert_matrix(loaded.view()) else {
            degenerate[f] = true;
            continue;
        };
        // numerator = phi_int^-1 phi_tgt
        let num = inv.dot(&phi_tgt);
        let trace: Complex64 = (0..ch).map(|i| num[(i, i)]).sum();
        if trace.norm() < 1e-300 {
            degenerate[f] = true;
            continue;
        }
        for i in 0..ch {
            weights[(f, i)] = num[(i, ref_channel)] / trace;
        }
    }

    Ok(BeamformerWeights { weights, degenerate })
}

/// Applies beamformer weights: `y(t,f) = w(f)^H x(t,f)`.
pub fn beamform(s: &Spectrogram, weights: &BeamformerWeights) -> Result<Spectrogram> {
    if weights.channels() != s.channels() || weights.freq_bins() != s.freq_bins() {
        return Err(Error::ShapeMismatch {
            expected: format!("weights {} x {}", s.freq_bins(), s.channels()),
            actual: format!("{} x {}", weights.freq_bins(), weights.channels()),
        });
    }
    let mut out = Array3::zeros((1, s.frames(), s.freq_bins()));
    for t in 0..s.frames() {
        for f in 0..s.freq_bins() {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..s.channels() {
                acc += weights.weights()[(f, c)].conj() * s.bins()[(c, t, f)];
            }
            out[(0, t, f)] = acc;
        }
    }
    Ok(Spectrogram::from_parts(out, *s.config(), s.sample_rate()))
}
