//! Meeting transcription metrics: the time-constrained minimum-permutation
//! word-error rate with optimal speaker mapping, a speaker-agnostic variant,
//! per-meeting bootstrap confidence intervals and metadata-vertical
//! breakdowns.

mod assignment;
mod bootstrap;
mod distance;
pub mod io;
mod metrics;
mod report;
mod text;
mod types;

pub use bootstrap::{confidence_interval, relative_ci, BootstrapCi, CiConfig};
pub use distance::tc_word_distance;
pub use metrics::{speaker_agnostic_wer, tcpwer, SpeakerPairing, TcpWerScore, WerScore};
pub use report::{build_report, vertical_breakdown, AggregateScores, MeetingScore, ScoreReport, VerticalRow};
pub use text::{normalize_and_tokenize, normalize_token};
pub use types::{ErrorCounts, MeetingMetadata, SegmentAnnotation, TimedWord, Track, TranscriptSet, WordTiming};
