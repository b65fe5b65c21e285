//! Text normalization and word timing: lowercase, strip punctuation except
//! intra-word apostrophes and hyphens, and interpolate word times when a
//! segment carries no word-level timestamps.

use crate::scoring::types::{SegmentAnnotation, TimedWord};

/// Normalizes one token. Returns `None` when nothing survives.
pub fn normalize_token(raw: &str) -> Option<String> {
    let kept: String = raw
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || *c == '\'' || *c == '-')
        .collect();
    let trimmed = kept.trim_matches(|c| c == '\'' || c == '-');
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_string())
    }
}

/// Turns a segment into normalized timed words. Word-level timestamps are
/// used when present; otherwise times are interpolated across the segment
/// span proportionally to character length.
pub fn normalize_and_tokenize(segment: &SegmentAnnotation) -> Vec<TimedWord> {
    if let Some(words) = &segment.words {
        return words
            .iter()
            .filter_map(|w| {
                normalize_token(&w.text).map(|text| TimedWord {
                    text,
                    start_s: w.start_s,
                    end_s: w.end_s,
                    speaker: segment.speaker.clone(),
                })
            })
            .collect();
    }

    let tokens: Vec<String> = segment
        .transcript
        .split_whitespace()
        .filter_map(normalize_token)
        .collect();
    if tokens.is_empty() {
        return Vec::new();
    }
    let total_chars: usize = tokens.iter().map(String::len).sum();
    let span = segment.end_s - segment.start_s;
    let mut out = Vec::with_capacity(tokens.len());
    let mut consumed = 0usize;
    for text in tokens {
        let start = segment.start_s + span * consumed as f64 / total_chars as f64;
        consumed += text.len();
        let end = segment.start_s + span * consumed as f64 / total_chars as f64;
        out.push(TimedWord {
            text,
            start_s: start,
            end_s: end,
            speaker: segment.speaker.clone(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::types::WordTiming;

    fn segment(start: f64, end: f64, transcript: &str) -> SegmentAnnotation {
        SegmentAnnotation {
            start_s: start,
            end_s: end,
            speaker: "spk0".into(),
            transcript: transcript.into(),
            words: None,
        }
    }

    #[test]
    fn equal_length_words_split_the_span() {
        let words = normalize_and_tokenize(&segment(0.0, 2.0, "Hello, world!"));
        assert_eq!(words.len(), 2);
        assert_eq!(words[0].text, "hello");
        assert_eq!(words[1].text, "world");
        assert!((words[0].start_s - 0.0).abs() < 1e-12);
        assert!((words[0].end_s - 1.0).abs() < 1e-12);
        assert!((words[1].start_s - 1.0).abs() < 1e-12);
        assert!((words[1].end_s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_transcript_yields_no_words() {
        assert!(normalize_and_tokenize(&segment(0.0, 1.0, "")).is_empty());
        assert!(normalize_and_tokenize(&segment(0.0, 1.0, "... !!")).is_empty());
    }

    #[test]
    fn intra_word_apostrophes_and_hyphens_survive() {
        let words = normalize_and_tokenize(&segment(0.0, 1.0, "Don't stop, co-pilot! 'quoted'"));
        let texts: Vec<&str> = words.iter().map(|w| w.text.as_str()).collect();
        assert_eq!(texts, vec!["don't", "stop", "co-pilot", "quoted"]);
    }

    #[test]
    fn provided_word_times_are_preserved() {
        let seg = SegmentAnnotation {
            start_s: 0.0,
            end_s: 5.0,
            speaker: "a".into(),
            transcript: "One two".into(),
            words: Some(vec![
                WordTiming { text: "One".into(), start_s: 0.5, end_s: 0.9 },
                WordTiming { text: "two".into(), start_s: 2.0, end_s: 2.4 },
            ]),
        };
        let words = normalize_and_tokenize(&seg);
        assert_eq!(words[0].text, "one");
        assert_eq!(words[0].start_s, 0.5);
        assert_eq!(words[1].end_s, 2.4);
    }
}
