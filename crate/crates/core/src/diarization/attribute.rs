//! From window labels to speaker intervals, and from intervals to
//! word-level speaker attribution via the three assignment rules.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One speaker-labeled interval on one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerInterval {
    pub start_s: f64,
    pub end_s: f64,
    pub label: usize,
}

/// Speaker intervals per CSS stream, with labels drawn from one global label
/// space across streams.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DiarizationOutput {
    pub streams: Vec<Vec<SpeakerInterval>>,
}

impl DiarizationOutput {
    /// Checks per-speaker intervals are sorted and non-overlapping.
    pub fn validate(&self) -> Result<()> {
        for stream in &self.streams {
            let mut by_label: std::collections::BTreeMap<usize, Vec<&SpeakerInterval>> =
                Default::default();
            for iv in stream {
                if !(iv.start_s < iv.end_s) || iv.start_s < 0.0 {
                    return Err(Error::invalid_input(format!(
                        "bad interval [{}, {}]",
                        iv.start_s, iv.end_s
                    )));
                }
                by_label.entry(iv.label).or_default().push(iv);
            }
            for intervals in by_label.values() {
                for pair in intervals.windows(2) {
                    if pair[1].start_s < pair[0].end_s {
                        return Err(Error::invalid_input(
                            "single-speaker intervals overlap within one stream",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Merges consecutive equal-label windows into intervals. Overlapping
/// windows with different labels split at the midpoint of their overlap, so
/// the output covers exactly the union of the window intervals.
pub fn intervals_from_labels(windows: &[(f64, f64, usize)]) -> Vec<SpeakerInterval> {
    let mut sorted: Vec<(f64, f64, usize)> = windows.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut out: Vec<SpeakerInterval> = Vec::new();
    for &(start, end, label) in &sorted {
        match out.last_mut() {
            Some(last) if last.label == label && start <= last.end_s => {
                last.end_s = last.end_s.max(end);
            }
            Some(last) if start < last.end_s => {
                let mid = 0.5 * (start + last.end_s);
                last.end_s = mid;
                out.push(SpeakerInterval { start_s: mid, end_s: end, label });
            }
            _ => out.push(SpeakerInterval { start_s: start, end_s: end, label }),
        }
    }
    out.retain(|iv| iv.start_s < iv.end_s);
    out
}

/// An ASR word bound to the CSS stream it was recognized on.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamWord {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
    pub stream: usize,
}

/// A word with its attributed speaker.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedWord {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
    pub speaker: usize,
    pub stream: usize,
}

/// Assigns a speaker to every word:
///
/// 1. exactly one active speaker overlaps the word's boundaries on its
///    stream: that speaker is assigned;
/// 2. no active speaker: the label of the nearest attributed word in time
///    (interval-midpoint distance, earlier word on ties), resolved in a
///    second pass;
/// 3. several active speakers: the one active longest within the word wins
///    (ties: earliest interval onset, then smallest label).
pub fn attribute_words(
    words: &[StreamWord],
    diar: &DiarizationOutput,
) -> Result<Vec<AttributedWord>> {
    for w in words {
        if w.stream >= diar.streams.len() {
            return Err(Error::invalid_input(format!(
                "word '{}' names stream {} but diarization covers {} streams",
                w.text,
                w.stream,
                diar.streams.len()
            )));
        }
        if w.start_s >= w.end_s {
            return Err(Error::invalid_input(format!(
                "word '{}' has an empty time span",
                w.text
            )));
        }
    }

    // Pass 1: rules 1 and 3.
    let mut assigned: Vec<Option<usize>> = Vec::with_capacity(words.len());
    for w in words {
        let mut per_label: std::collections::BTreeMap<usize, (f64, f64)> = Default::default();
        for iv in &diar.streams[w.stream] {
            let overlap = iv.end_s.min(w.end_s) - iv.start_s.max(w.start_s);
            if overlap > 0.0 {
                let entry = per_label.entry(iv.label).or_insert((0.0, iv.start_s));
                entry.0 += overlap;
                entry.1 = entry.1.min(iv.start_s);
            }
        }
        let label = match per_label.len() {
            0 => None,
            1 => per_label.keys().next().copied(),
            _ => per_label
                .iter()
                .max_by(|(la, (ova, sa)), (lb, (ovb, sb))| {
                    ova.total_cmp(ovb)
                        .then(sb.total_cmp(sa)) // earlier onset wins
                        .then(lb.cmp(la)) // then smaller label
                })
                .map(|(l, _)| *l),
        };
        assigned.push(label);
    }

    // Pass 2: nearest attributed word by midpoint distance.
    let anchors: Vec<(f64, usize, usize)> = words
        .iter()
        .zip(&assigned)
        .enumerate()
        .filter_map(|(i, (w, a))| a.map(|l| (0.5 * (w.start_s + w.end_s), l, i)))
        .collect();
    if anchors.is_empty() && !words.is_empty() {
        return Err(Error::Unattributable);
    }

    let mut out = Vec::with_capacity(words.len());
    for (w, a) in words.iter().zip(&assigned) {
        let label = match a {
            Some(l) => *l,
            None => {
                let mid = 0.5 * (w.start_s + w.end_s);
                anchors
                    .iter()
                    .min_by(|(ma, _, ia), (mb, _, ib)| {
                        (ma - mid)
                            .abs()
                            .total_cmp(&(mb - mid).abs())
                            .then(ma.total_cmp(mb)) // earlier word on ties
                            .then(ia.cmp(ib))
                    })
                    .map(|(_, l, _)| *l)
                    .expect("anchors checked nonempty")
            }
        };
        out.push(AttributedWord {
            text: w.text.clone(),
            start_s: w.start_s,
            end_s: w.end_s,
            speaker: label,
            stream: w.stream,
        });
    }
    Ok(out)
}

/// RTTM-style serialization: `SPEAKER <meeting_id> <stream> <start> <dur> <label>`.
pub fn format_rttm(meeting_id: &str, diar: &DiarizationOutput) -> String {
    let mut out = String::new();
    for (stream, intervals) in diar.streams.iter().enumerate() {
        for iv in intervals {
            out.push_str(&format!(
                "SPEAKER {meeting_id} {stream} {:.3} {:.3} spk{}\n",
                iv.start_s,
                iv.end_s - iv.start_s,
                iv.label
            ));
        }
    }
    out
}

#[derive(Serialize)]
struct AttributedWordRow<'a> {
    word: &'a str,
    start: f64,
    end: f64,
    speaker: String,
    stream: usize,
}

/// Attributed words as JSON lines with fields (word, start, end, speaker, stream).
pub fn write_attributed_words(path: impl AsRef<Path>, words: &[AttributedWord]) -> Result<()> {
    let mut file = std::fs::File::create(path.as_ref())?;
    for w in words {
        let row = AttributedWordRow {
            word: &w.text,
            start: w.start_s,
            end: w.end_s,
            speaker: format!("spk{}", w.speaker),
            stream: w.stream,
        };
        serde_json::to_writer(&mut file, &row)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(text: &str, start: f64, end: f64, stream: usize) -> StreamWord {
        StreamWord { text: text.into(), start_s: start, end_s: end, stream }
    }

    fn diar(streams: Vec<Vec<(f64, f64, usize)>>) -> DiarizationOutput {
        DiarizationOutput {
            streams: streams
                .into_iter()
                .map(|ivs| {
                    ivs.into_iter()
                        .map(|(s, e, l)| SpeakerInterval { start_s: s, end_s: e, label: l })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn one_label_merges_to_one_interval() {
        let windows = vec![(0.0, 1.5, 0), (0.75, 2.25, 0), (1.5, 3.0, 0)];
        let out = intervals_from_labels(&windows);
        assert_eq!(out, vec![SpeakerInterval { start_s: 0.0, end_s: 3.0, label: 0 }]);
    }

    #[test]
    fn label_change_splits_at_overlap_midpoint() {
        let windows = vec![(0.0, 1.5, 0), (0.75, 2.25, 1)];
        let out = intervals_from_labels(&windows);
        // Overlap [0.75, 1.5] midpoint = 1.125.
        assert_eq!(
            out,
            vec![
                SpeakerInterval { start_s: 0.0, end_s: 1.125, label: 0 },
                SpeakerInterval { start_s: 1.125, end_s: 2.25, label: 1 },
            ]
        );
    }

    #[test]
    fn alternating_labels_clip_per_window() {
        let windows = vec![(0.0, 1.0, 0), (0.5, 1.5, 1), (1.0, 2.0, 0)];
        let out = intervals_from_labels(&windows);
        assert_eq!(
            out,
            vec![
                SpeakerInterval { start_s: 0.0, end_s: 0.75, label: 0 },
                SpeakerInterval { start_s: 0.75, end_s: 1.25, label: 1 },
                SpeakerInterval { start_s: 1.25, end_s: 2.0, label: 0 },
            ]
        );
    }

    #[test]
    fn coverage_matches_window_union() {
        let windows = vec![(0.0, 1.0, 0), (2.0, 3.0, 1), (2.5, 3.5, 2)];
        let out = intervals_from_labels(&windows);
        // The gap (1.0, 2.0) stays uncovered; total covered span is 1 + 1.5.
        let covered: f64 = out.iter().map(|iv| iv.end_s - iv.start_s).sum();
        assert!((covered - 2.5).abs() < 1e-12);
        assert_eq!(out[0].end_s, 1.0);
        assert_eq!(out[1].start_s, 2.0);
    }

    #[test]
    fn rule_one_single_active_speaker() {
        let d = diar(vec![vec![(0.0, 5.0, 0)]]);
        let out = attribute_words(&[word("hi", 1.0, 1.4, 0)], &d).unwrap();
        assert_eq!(out[0].speaker, 0);
    }

    #[test]
    fn rule_three_longest_overlap_wins() {
        let d = diar(vec![vec![(0.9, 1.1, 0), (1.1, 2.0, 1)]]);
        let out = attribute_words(&[word("w", 1.0, 1.4, 0)], &d).unwrap();
        // Overlaps: speaker 0 gets 0.1 s, speaker 1 gets 0.3 s.
        assert_eq!(out[0].speaker, 1);
    }

    #[test]
    fn rule_two_nearest_attributed_word() {
        let d = diar(vec![vec![(0.0, 9.0, 0), (12.0, 15.0, 1)]]);
        let words = vec![
            word("a", 8.0, 9.0, 0),    // rule 1 -> speaker 0, midpoint 8.5
            word("gap", 10.0, 10.3, 0), // no active speaker
            word("b", 12.0, 12.4, 0),  // rule 1 -> speaker 1, midpoint 12.2
        ];
        let out = attribute_words(&words, &d).unwrap();
        // Midpoint 10.15: distance 1.65 to "a" vs 2.05 to "b".
        assert_eq!(out[1].speaker, 0);
    }

    #[test]
    fn rule_two_tie_prefers_earlier_word() {
        let d = diar(vec![vec![(0.0, 1.0, 0), (3.0, 4.0, 1)]]);
        // Exactly representable times so the midpoint tie is exact.
        let words = vec![
            word("a", 0.25, 0.75, 0),  // midpoint 0.5, speaker 0
            word("x", 1.75, 2.25, 0),  // midpoint 2.0, equidistant to 0.5 and 3.5
            word("b", 3.25, 3.75, 0),  // midpoint 3.5, speaker 1
        ];
        let out = attribute_words(&words, &d).unwrap();
        assert_eq!(out[1].speaker, 0);
    }

    #[test]
    fn unattributable_when_no_anchor_exists() {
        let d = diar(vec![vec![]]);
        let err = attribute_words(&[word("w", 0.0, 1.0, 0)], &d);
        assert!(matches!(err, Err(Error::Unattributable)));
    }

    #[test]
    fn every_word_gets_exactly_one_label() {
        let d = diar(vec![
            vec![(0.0, 2.0, 0), (2.0, 4.0, 1)],
            vec![(0.0, 4.0, 2)],
        ]);
        let words = vec![
            word("w1", 0.5, 0.9, 0),
            word("w2", 2.5, 2.9, 0),
            word("w3", 1.0, 1.5, 1),
            word("w4", 5.0, 5.2, 1),
        ];
        let out = attribute_words(&words, &d).unwrap();
        assert_eq!(out.len(), words.len());
        for (w, a) in words.iter().zip(&out) {
            assert_eq!(w.text, a.text);
        }
    }

    #[test]
    fn relabeling_bijection_transforms_output() {
        let d = diar(vec![vec![(0.0, 2.0, 0), (2.0, 4.0, 1)]]);
        let words = vec![word("w1", 0.5, 0.9, 0), word("w2", 2.5, 2.9, 0)];
        let base = attribute_words(&words, &d).unwrap();
        // Swap labels 0 <-> 1.
        let swapped = diar(vec![vec![(0.0, 2.0, 1), (2.0, 4.0, 0)]]);
        let out = attribute_words(&words, &swapped).unwrap();
        for (a, b) in base.iter().zip(&out) {
            assert_eq!(a.speaker, 1 - b.speaker);
        }
    }

    #[test]
    fn rttm_format() {
        let d = diar(vec![vec![(0.0, 1.5, 0)], vec![(2.0, 2.5, 1)]]);
        let s = format_rttm("meet1", &d);
        assert_eq!(
            s,
            "SPEAKER meet1 0 0.000 1.500 spk0\nSPEAKER meet1 1 2.000 0.500 spk1\n"
        );
    }
}
