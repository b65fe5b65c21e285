//! Meeting-mixture simulation: RIR splitting at the 50 ms mark, clean-speech
//! pause augmentation, MOS-quartile filtering, shifted 3-speaker mixing with
//! a noise floor, and reverberation-time estimation.

mod augment;
mod generate;
mod manifest;
mod mix;
mod rir;

pub use augment::{detect_pauses, insert_silences, mos_quartile_filter, PauseConfig, UtteranceRecord};
pub use generate::{
    generate_bundle, generate_dataset, read_bundle, write_bundle, BundleMeta, BundleSources,
    GeneratorConfig, SpeakerSource,
};
pub use manifest::{read_manifest, write_manifest, ManifestRecord, NoiseRecord, RirRecord, SimulationManifest};
pub use mix::{convolve_components, mix_meeting, ConvolvedUtterance, SupervisionBundle, SNR_RANGE_DB};
pub use rir::{estimate_rt60, split_rir, Rir, RirSplit};
