//! Score aggregation: per-meeting rows, overall aggregates with confidence
//! intervals, and per-vertical (metadata tag) breakdowns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::bootstrap::{confidence_interval, BootstrapCi, CiConfig};
use crate::scoring::types::{ErrorCounts, MeetingMetadata};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeetingScore {
    pub meeting_id: String,
    pub tcp_wer: f64,
    pub sa_wer: f64,
    pub tcp_counts: ErrorCounts,
    pub sa_counts: ErrorCounts,
    pub reference_words: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateScores {
    pub meetings: usize,
    pub mean_tcp_wer: f64,
    pub mean_sa_wer: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tcp_wer_ci: Option<BootstrapCi>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sa_wer_ci: Option<BootstrapCi>,
}

/// One row of the vertical table; `tag` is `all` for the overall row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerticalRow {
    pub tag: String,
    pub meetings: usize,
    pub mean_tcp_wer: f64,
    pub mean_sa_wer: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tcp_wer_ci: Option<BootstrapCi>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sa_wer_ci: Option<BootstrapCi>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreReport {
    pub per_meeting: Vec<MeetingScore>,
    pub aggregate: AggregateScores,
    pub verticals: Vec<VerticalRow>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn ci_of(values: &[f64], cfg: &CiConfig) -> Option<BootstrapCi> {
    if values.len() < 2 {
        None
    } else {
        confidence_interval(values, cfg.level, cfg.resamples, cfg.seed).ok()
    }
}

fn aggregate(scores: &[MeetingScore], cfg: &CiConfig) -> AggregateScores {
    let tcp: Vec<f64> = scores.iter().map(|s| s.tcp_wer).collect();
    let sa: Vec<f64> = scores.iter().map(|s| s.sa_wer).collect();
    AggregateScores {
        meetings: scores.len(),
        mean_tcp_wer: mean(&tcp),
        mean_sa_wer: mean(&sa),
        tcp_wer_ci: ci_of(&tcp, cfg),
        sa_wer_ci: ci_of(&sa, cfg),
    }
}

/// Per-tag aggregate table. Every scored meeting must carry metadata; rows
/// with fewer than two meetings report no interval. The `all` row covers
/// every meeting regardless of tags.
pub fn vertical_breakdown(
    scores: &[MeetingScore],
    metadata: &[MeetingMetadata],
    cfg: &CiConfig,
) -> Result<Vec<VerticalRow>> {
    let meta_by_id: BTreeMap<&str, &MeetingMetadata> = metadata
        .iter()
        .map(|m| (m.meeting_id.as_str(), m))
        .collect();
    let mut by_tag: BTreeMap<&str, Vec<&MeetingScore>> = BTreeMap::new();
    for score in scores {
        let meta = meta_by_id.get(score.meeting_id.as_str()).ok_or_else(|| {
            Error::invalid_input(format!("no metadata for meeting {}", score.meeting_id))
        })?;
        for tag in &meta.tags {
            by_tag.entry(tag.as_str()).or_default().push(score);
        }
    }

    let row = |tag: &str, scores: &[&MeetingScore]| -> VerticalRow {
        let tcp: Vec<f64> = scores.iter().map(|s| s.tcp_wer).collect();
        let sa: Vec<f64> = scores.iter().map(|s| s.sa_wer).collect();
        VerticalRow {
            tag: tag.to_string(),
            meetings: scores.len(),
            mean_tcp_wer: mean(&tcp),
            mean_sa_wer: mean(&sa),
            tcp_wer_ci: ci_of(&tcp, cfg),
            sa_wer_ci: ci_of(&sa, cfg),
        }
    };

    let all: Vec<&MeetingScore> = scores.iter().collect();
    let mut rows = vec![row("all", &all)];
    for (tag, tagged) in &by_tag {
        rows.push(row(tag, tagged));
    }
    Ok(rows)
}

/// Builds the full report from per-meeting scores.
pub fn build_report(
    scores: Vec<MeetingScore>,
    metadata: &[MeetingMetadata],
    cfg: &CiConfig,
) -> Result<ScoreReport> {
    let verticals = if metadata.is_empty() {
        let all: Vec<&MeetingScore> = scores.iter().collect();
        let tcp: Vec<f64> = all.iter().map(|s| s.tcp_wer).collect();
        let sa: Vec<f64> = all.iter().map(|s| s.sa_wer).collect();
        vec![VerticalRow {
            tag: "all".into(),
            meetings: all.len(),
            mean_tcp_wer: mean(&tcp),
            mean_sa_wer: mean(&sa),
            tcp_wer_ci: ci_of(&tcp, cfg),
            sa_wer_ci: ci_of(&sa, cfg),
        }]
    } else {
        vertical_breakdown(&scores, metadata, cfg)?
    };
    let aggregate = aggregate(&scores, cfg);
    Ok(ScoreReport {
        per_meeting: scores,
        aggregate,
        verticals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(id: &str, tcp: f64, sa: f64) -> MeetingScore {
        MeetingScore {
            meeting_id: id.into(),
            tcp_wer: tcp,
            sa_wer: sa,
            tcp_counts: ErrorCounts::default(),
            sa_counts: ErrorCounts::default(),
            reference_words: 100,
        }
    }

    fn meta(id: &str, tags: &[&str]) -> MeetingMetadata {
        MeetingMetadata {
            meeting_id: id.into(),
            tags: tags.iter().map(|t| t.to_string()).collect(),
            device_id: None,
            track: None,
        }
    }

    #[test]
    fn shared_tag_row_equals_overall() {
        let scores = vec![score("m1", 0.2, 0.1), score("m2", 0.4, 0.3)];
        let metadata = vec![meta("m1", &["extra_noise"]), meta("m2", &["extra_noise"])];
        let rows = vertical_breakdown(&scores, &metadata, &CiConfig::default()).unwrap();
        let all = rows.iter().find(|r| r.tag == "all").unwrap();
        let tagged = rows.iter().find(|r| r.tag == "extra_noise").unwrap();
        assert_eq!(all.mean_tcp_wer, tagged.mean_tcp_wer);
        assert_eq!(all.meetings, tagged.meetings);
    }

    #[test]
    fn overall_mean_is_count_weighted() {
        let scores = vec![
            score("m1", 0.1, 0.1),
            score("m2", 0.3, 0.3),
            score("m3", 0.5, 0.5),
        ];
        let metadata = vec![
            meta("m1", &["quiet"]),
            meta("m2", &["noisy"]),
            meta("m3", &["noisy"]),
        ];
        let rows = vertical_breakdown(&scores, &metadata, &CiConfig::default()).unwrap();
        let all = rows.iter().find(|r| r.tag == "all").unwrap();
        let quiet = rows.iter().find(|r| r.tag == "quiet").unwrap();
        let noisy = rows.iter().find(|r| r.tag == "noisy").unwrap();
        let weighted = (quiet.mean_tcp_wer * quiet.meetings as f64
            + noisy.mean_tcp_wer * noisy.meetings as f64)
            / 3.0;
        assert!((all.mean_tcp_wer - weighted).abs() < 1e-12);
    }

    #[test]
    fn singleton_tag_has_no_interval() {
        let scores = vec![score("m1", 0.2, 0.1), score("m2", 0.3, 0.2)];
        let metadata = vec![meta("m1", &["whiteboard"]), meta("m2", &[])];
        let rows = vertical_breakdown(&scores, &metadata, &CiConfig::default()).unwrap();
        let wb = rows.iter().find(|r| r.tag == "whiteboard").unwrap();
        assert_eq!(wb.meetings, 1);
        assert!(wb.tcp_wer_ci.is_none());
        let all = rows.iter().find(|r| r.tag == "all").unwrap();
        assert!(all.tcp_wer_ci.is_some());
    }

    #[test]
    fn missing_metadata_is_an_error() {
        let scores = vec![score("m1", 0.2, 0.1)];
        assert!(vertical_breakdown(&scores, &[], &CiConfig::default()).is_err());
    }
}
