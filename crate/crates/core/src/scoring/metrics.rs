//! The two challenge metrics: time-constrained minimum-permutation WER and
//! the speaker-agnostic variant.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scoring::assignment::min_cost_assignment;
use crate::scoring::distance::tc_word_distance;
use crate::scoring::text::normalize_and_tokenize;
use crate::scoring::types::{ErrorCounts, TimedWord, TranscriptSet};

/// One hypothesis-to-reference speaker pairing; `None` marks padding against
/// an unmatched speaker on the other side.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerPairing {
    pub hypothesis: Option<String>,
    pub reference: Option<String>,
    pub counts: ErrorCounts,
}

#[derive(Debug, Clone)]
pub struct TcpWerScore {
    pub rate: f64,
    pub counts: ErrorCounts,
    pub reference_words: usize,
    pub mapping: Vec<SpeakerPairing>,
}

#[derive(Debug, Clone)]
pub struct WerScore {
    pub rate: f64,
    pub counts: ErrorCounts,
    pub reference_words: usize,
}

/// Per-speaker word streams, time-sorted; speaker order is lexicographic so
/// the cost matrix layout is deterministic.
fn speaker_streams(set: &TranscriptSet) -> BTreeMap<String, Vec<TimedWord>> {
    let mut streams: BTreeMap<String, Vec<TimedWord>> = BTreeMap::new();
    for seg in &set.segments {
        for w in normalize_and_tokenize(seg) {
            streams.entry(w.speaker.clone()).or_default().push(w);
        }
    }
    for words in streams.values_mut() {
        sort_words(words);
    }
    streams
}

fn sort_words(words: &mut [TimedWord]) {
    words.sort_by(|a, b| {
        a.start_s
            .total_cmp(&b.start_s)
            .then(a.end_s.total_cmp(&b.end_s))
            .then(a.text.cmp(&b.text))
    });
}

/// Time-constrained minimum-permutation word-error rate. Speaker sets are
/// padded with empty streams to a common size and matched one-to-one by a
/// minimum-cost assignment over per-pair alignment costs.
pub fn tcpwer(hyp: &TranscriptSet, reference: &TranscriptSet, collar_s: f64) -> Result<TcpWerScore> {
    let hyp_streams = speaker_streams(hyp);
    let ref_streams = speaker_streams(reference);
    let hyp_speakers: Vec<&String> = hyp_streams.keys().collect();
    let ref_speakers: Vec<&String> = ref_streams.keys().collect();
    let empty: Vec<TimedWord> = Vec::new();

    let n = hyp_speakers.len().max(ref_speakers.len());
    let reference_words: usize = ref_streams.values().map(Vec::len).sum();

    let mut counts_matrix: Vec<Vec<ErrorCounts>> = vec![vec![ErrorCounts::default(); n]; n];
    let mut cost = Array2::zeros((n, n));
    for a in 0..n {
        let hyp_words = hyp_speakers.get(a).map_or(&empty, |s| &hyp_streams[*s]);
        for b in 0..n {
            let ref_words = ref_speakers.get(b).map_or(&empty, |s| &ref_streams[*s]);
            let c = tc_word_distance(hyp_words, ref_words, collar_s);
            cost[(a, b)] = c.total() as f64;
            counts_matrix[a][b] = c;
        }
    }

    let assignment = min_cost_assignment(&cost);
    let mut total = ErrorCounts::default();
    let mut mapping = Vec::with_capacity(n);
    for (a, &b) in assignment.iter().enumerate() {
        let c = counts_matrix[a][b];
        total += c;
        let pairing = SpeakerPairing {
            hypothesis: hyp_speakers.get(a).map(|s| (*s).clone()),
            reference: ref_speakers.get(b).map(|s| (*s).clone()),
            counts: c,
        };
        if pairing.hypothesis.is_some() || pairing.reference.is_some() {
            mapping.push(pairing);
        }
    }

    if reference_words == 0 {
        return Err(Error::UndefinedRate {
            substitutions: total.substitutions,
            deletions: total.deletions,
            insertions: total.insertions,
        });
    }
    Ok(TcpWerScore {
        rate: total.total() as f64 / reference_words as f64,
        counts: total,
        reference_words,
        mapping,
    })
}

/// Speaker-agnostic word-error rate: words from all speakers are pooled into
/// one stream per side (sorted by start time, ties by text) and aligned with
/// the same time constraint.
pub fn speaker_agnostic_wer(
    hyp: &TranscriptSet,
    reference: &TranscriptSet,
    collar_s: f64,
) -> Result<WerScore> {
    let pool = |set: &TranscriptSet| -> Vec<TimedWord> {
        let mut words: Vec<TimedWord> = set
            .segments
            .iter()
            .flat_map(|seg| normalize_and_tokenize(seg))
            .collect();
        words.sort_by(|a, b| a.start_s.total_cmp(&b.start_s).then(a.text.cmp(&b.text)));
        words
    };
    let hyp_words = pool(hyp);
    let ref_words = pool(reference);
    let counts = tc_word_distance(&hyp_words, &ref_words, collar_s);
    if ref_words.is_empty() {
        return Err(Error::UndefinedRate {
            substitutions: counts.substitutions,
            deletions: counts.deletions,
            insertions: counts.insertions,
        });
    }
    Ok(WerScore {
        rate: counts.total() as f64 / ref_words.len() as f64,
        counts,
        reference_words: ref_words.len(),
    })
}
