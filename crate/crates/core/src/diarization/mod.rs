//! Speaker diarization over separated streams: embedding extraction,
//! eigengap spectral clustering with a global label space, and the
//! three-rule word attribution.

mod attribute;
mod cluster;
mod embed;
mod vad;

pub use attribute::{
    attribute_words, format_rttm, intervals_from_labels, write_attributed_words, AttributedWord,
    DiarizationOutput, SpeakerInterval, StreamWord,
};
pub use cluster::{nme_sc_cluster, ClusterResult, NmeScConfig};
pub use embed::{window_embeddings, FilterbankEmbedder, SpeakerEmbedder, WindowEmbedding};
pub use vad::{detect_activity, VadConfig};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::signal::Waveform;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiarizationConfig {
    pub window_s: f64,
    pub hop_s: f64,
    pub vad: VadConfig,
    pub nme: NmeScConfig,
}

impl Default for DiarizationConfig {
    fn default() -> Self {
        Self {
            window_s: 1.5,
            hop_s: 0.75,
            vad: VadConfig::default(),
            nme: NmeScConfig::default(),
        }
    }
}

/// Diarizes a set of CSS output streams. Embeddings from all streams are
/// pooled into one clustering problem so a speaker appearing on several
/// streams keeps a single label.
pub fn diarize_streams(
    streams: &[Waveform],
    embedder: &dyn SpeakerEmbedder,
    cfg: &DiarizationConfig,
) -> Result<DiarizationOutput> {
    let mut windows_per_stream: Vec<Vec<WindowEmbedding>> = Vec::with_capacity(streams.len());
    for stream in streams {
        let activity = detect_activity(stream, &cfg.vad)?;
        windows_per_stream.push(window_embeddings(
            stream,
            embedder,
            cfg.window_s,
            cfg.hop_s,
            &activity,
        )?);
    }

    let pooled: Vec<Vec<f64>> = windows_per_stream
        .iter()
        .flat_map(|ws| ws.iter().map(|w| w.vector.clone()))
        .collect();
    let clusters = nme_sc_cluster(&pooled, &cfg.nme)?;

    let mut output = DiarizationOutput::default();
    let mut cursor = 0usize;
    for windows in &windows_per_stream {
        let labeled: Vec<(f64, f64, usize)> = windows
            .iter()
            .zip(&clusters.labels[cursor..cursor + windows.len()])
            .map(|(w, &l)| (w.start_s, w.end_s, l))
            .collect();
        cursor += windows.len();
        output.streams.push(intervals_from_labels(&labeled));
    }
    debug_assert!(output.validate().is_ok());
    Ok(output)
}
