//! Far-field meeting transcription toolkit.
//!
//! The crate is organized around five subsystems:
//!
//! - [`signal`]: waveforms, STFT analysis/synthesis, time-frequency masks.
//! - [`css`]: continuous speech separation — block-wise mask estimation,
//!   permutation-aligned stitching, mask multiplication and mask-based MVDR
//!   beamforming.
//! - [`simulator`]: meeting-mixture simulation with full supervision
//!   decomposition (direct+early / late-reverb / noise) and RT60 estimation.
//! - [`diarization`]: eigengap spectral clustering over speaker embeddings
//!   and word-to-speaker attribution.
//! - [`scoring`]: time-constrained minimum-permutation WER, the
//!   speaker-agnostic variant, bootstrap confidence intervals and
//!   metadata-vertical breakdowns.
//!
//! [`pipeline`] wires everything into a CSS -> ASR -> diarization flow with
//! pluggable mask-estimator, embedder and ASR seams.

pub mod css;
pub mod diarization;
pub mod error;
pub mod pipeline;
pub mod scoring;
pub mod signal;
pub mod simulator;

pub use error::{Error, Result};
