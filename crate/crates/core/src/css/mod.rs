//! Continuous speech separation: block-wise mask estimation through a
//! pluggable estimator, permutation alignment and stitching across blocks,
//! and conversion of masks into separated streams by mask multiplication or
//! mask-based MVDR beamforming.

mod beamform;
mod estimator;
mod pipeline;
mod stitch;

pub use beamform::{beamform, compute_scm, mvdr_weights, BeamformerWeights, Scm};
pub use estimator::{MaskEstimator, OracleIrmEstimator};
pub use pipeline::{css_pipeline, CssConfig, CssDebug, CssMode, CssOutput};
pub use stitch::{align_adjacent, all_permutations, pit_loss, stitch, AlignedBlock, PitOutcome};
