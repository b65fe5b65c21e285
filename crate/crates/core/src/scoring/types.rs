use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Word with explicit timing inside a segment, as stored in transcript files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordTiming {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
}

/// One reference or hypothesis segment: a time interval, a speaker label and
/// a transcript, optionally with word-level timestamps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentAnnotation {
    pub start_s: f64,
    pub end_s: f64,
    pub speaker: String,
    pub transcript: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<WordTiming>>,
}

impl SegmentAnnotation {
    pub fn validate(&self) -> Result<()> {
        if !(self.start_s < self.end_s) {
            return Err(Error::invalid_input(format!(
                "segment start {} must precede end {}",
                self.start_s, self.end_s
            )));
        }
        if let Some(words) = &self.words {
            for w in words {
                if w.start_s > w.end_s {
                    return Err(Error::invalid_input(format!(
                        "word '{}' has start {} after end {}",
                        w.text, w.start_s, w.end_s
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A whole meeting's reference or hypothesis. Overlapping segments across
/// speakers are legal; hypothesis speaker labels need not match the
/// reference's.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TranscriptSet {
    pub meeting_id: String,
    pub segments: Vec<SegmentAnnotation>,
}

impl TranscriptSet {
    pub fn validate(&self) -> Result<()> {
        self.segments.iter().try_for_each(SegmentAnnotation::validate)
    }
}

/// A normalized token with its time span and speaker, the unit the
/// time-constrained alignment operates on.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedWord {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
    pub speaker: String,
}

/// Recording track of a device stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    SingleChannel,
    MultiChannel,
}

/// Per-meeting annotation used for vertical (per-tag) error analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeetingMetadata {
    pub meeting_id: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<Track>,
}

/// Substitution/deletion/insertion tallies of one alignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
}

impl ErrorCounts {
    pub fn total(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

impl std::ops::Add for ErrorCounts {
    type Output = ErrorCounts;
    fn add(self, rhs: ErrorCounts) -> ErrorCounts {
        ErrorCounts {
            substitutions: self.substitutions + rhs.substitutions,
            deletions: self.deletions + rhs.deletions,
            insertions: self.insertions + rhs.insertions,
        }
    }
}

impl std::ops::AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: ErrorCounts) {
        *self = *self + rhs;
    }
}
