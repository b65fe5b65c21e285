//! Transcript, metadata and report file formats. Transcripts are JSON lines,
//! one segment per line, grouped into [`TranscriptSet`]s by meeting id.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::report::ScoreReport;
use crate::scoring::types::{MeetingMetadata, SegmentAnnotation, TranscriptSet, WordTiming};

#[derive(Debug, Serialize, Deserialize)]
struct SegmentRow {
    meeting_id: String,
    start_s: f64,
    end_s: f64,
    speaker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transcript: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    words: Option<Vec<WordTiming>>,
}

/// Reads segment lines and groups them by meeting id, preserving first-seen
/// meeting order. Each row needs a transcript, word timings, or both.
pub fn read_transcripts(path: impl AsRef<Path>) -> Result<Vec<TranscriptSet>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut order: Vec<String> = Vec::new();
    let mut by_meeting: std::collections::HashMap<String, TranscriptSet> = Default::default();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: SegmentRow = serde_json::from_str(&line).map_err(|e| {
            Error::invalid_input(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        let transcript = match (&row.transcript, &row.words) {
            (Some(t), _) => t.clone(),
            (None, Some(words)) => words
                .iter()
                .map(|w| w.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            (None, None) => {
                return Err(Error::invalid_input(format!(
                    "{}:{}: segment needs a transcript or words",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        let segment = SegmentAnnotation {
            start_s: row.start_s,
            end_s: row.end_s,
            speaker: row.speaker,
            transcript,
            words: row.words,
        };
        segment.validate()?;
        if !by_meeting.contains_key(&row.meeting_id) {
            order.push(row.meeting_id.clone());
            by_meeting.insert(
                row.meeting_id.clone(),
                TranscriptSet { meeting_id: row.meeting_id.clone(), segments: Vec::new() },
            );
        }
        by_meeting.get_mut(&row.meeting_id).unwrap().segments.push(segment);
    }
    Ok(order.into_iter().map(|id| by_meeting.remove(&id).unwrap()).collect())
}

pub fn write_transcripts(path: impl AsRef<Path>, sets: &[TranscriptSet]) -> Result<()> {
    let mut file = std::fs::File::create(path.as_ref())?;
    for set in sets {
        for seg in &set.segments {
            let row = SegmentRow {
                meeting_id: set.meeting_id.clone(),
                start_s: seg.start_s,
                end_s: seg.end_s,
                speaker: seg.speaker.clone(),
                transcript: Some(seg.transcript.clone()),
                words: seg.words.clone(),
            };
            serde_json::to_writer(&mut file, &row)?;
            file.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Metadata file: JSON lines, one meeting per line.
pub fn read_metadata(path: impl AsRef<Path>) -> Result<Vec<MeetingMetadata>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let meta: MeetingMetadata = serde_json::from_str(&line).map_err(|e| {
            Error::invalid_input(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        out.push(meta);
    }
    Ok(out)
}

pub fn write_report_json(path: impl AsRef<Path>, report: &ScoreReport) -> Result<()> {
    std::fs::write(path.as_ref(), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

/// Per-meeting rates as CSV.
pub fn write_report_csv(path: impl AsRef<Path>, report: &ScoreReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_err)?;
    w.write_record([
        "meeting_id",
        "tcp_wer",
        "sa_wer",
        "tcp_substitutions",
        "tcp_deletions",
        "tcp_insertions",
        "reference_words",
    ])
    .map_err(csv_err)?;
    for m in &report.per_meeting {
        w.write_record([
            m.meeting_id.clone(),
            format!("{:.6}", m.tcp_wer),
            format!("{:.6}", m.sa_wer),
            m.tcp_counts.substitutions.to_string(),
            m.tcp_counts.deletions.to_string(),
            m.tcp_counts.insertions.to_string(),
            m.reference_words.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Vertical table as CSV.
pub fn write_verticals_csv(path: impl AsRef<Path>, report: &ScoreReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_err)?;
    w.write_record([
        "tag",
        "meetings",
        "mean_tcp_wer",
        "tcp_ci_low",
        "tcp_ci_high",
        "mean_sa_wer",
        "sa_ci_low",
        "sa_ci_high",
    ])
    .map_err(csv_err)?;
    for row in &report.verticals {
        let fmt_ci = |ci: &Option<crate::scoring::BootstrapCi>, pick: fn(&crate::scoring::BootstrapCi) -> f64| {
            ci.as_ref().map_or(String::new(), |c| format!("{:.6}", pick(c)))
        };
        w.write_record([
            row.tag.clone(),
            row.meetings.to_string(),
            format!("{:.6}", row.mean_tcp_wer),
            fmt_ci(&row.tcp_wer_ci, |c| c.low),
            fmt_ci(&row.tcp_wer_ci, |c| c.high),
            format!("{:.6}", row.mean_sa_wer),
            fmt_ci(&row.sa_wer_ci, |c| c.low),
            fmt_ci(&row.sa_wer_ci, |c| c.high),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid_input(format!("CSV: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_round_trip_groups_by_meeting() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.jsonl");
        let sets = vec![
            TranscriptSet {
                meeting_id: "m1".into(),
                segments: vec![SegmentAnnotation {
                    start_s: 0.0,
                    end_s: 2.0,
                    speaker: "a".into(),
                    transcript: "hello world".into(),
                    words: None,
                }],
            },
            TranscriptSet {
                meeting_id: "m2".into(),
                segments: vec![SegmentAnnotation {
                    start_s: 1.0,
                    end_s: 3.0,
                    speaker: "b".into(),
                    transcript: "good bye".into(),
                    words: Some(vec![
                        WordTiming { text: "good".into(), start_s: 1.0, end_s: 1.5 },
                        WordTiming { text: "bye".into(), start_s: 2.0, end_s: 2.5 },
                    ]),
                }],
            },
        ];
        write_transcripts(&path, &sets).unwrap();
        let back = read_transcripts(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].meeting_id, "m1");
        assert_eq!(back[1].segments[0].words.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn words_only_row_derives_transcript() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hyp.jsonl");
        std::fs::write(
            &path,
            "{\"meeting_id\":\"m\",\"start_s\":0.0,\"end_s\":1.0,\"speaker\":\"s\",\"words\":[{\"text\":\"hi\",\"start_s\":0.1,\"end_s\":0.3}]}\n",
        )
        .unwrap();
        let sets = read_transcripts(&path).unwrap();
        assert_eq!(sets[0].segments[0].transcript, "hi");
    }

    #[test]
    fn segment_without_content_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"meeting_id\":\"m\",\"start_s\":0.0,\"end_s\":1.0,\"speaker\":\"s\"}\n",
        )
        .unwrap();
        assert!(read_transcripts(&path).is_err());
    }
}
