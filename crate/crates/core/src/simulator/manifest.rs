//! Simulation input manifests: JSON lines, one record per utterance, RIR or
//! noise source.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::augment::UtteranceRecord;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RirRecord {
    pub path: PathBuf,
    pub room_id: String,
    pub position_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifestRecord {
    Utterance(UtteranceRecord),
    Rir(RirRecord),
    Noise(NoiseRecord),
}

/// Parsed simulation inputs, paths resolved against the manifest location.
#[derive(Debug, Clone, Default)]
pub struct SimulationManifest {
    pub utterances: Vec<UtteranceRecord>,
    pub rirs: Vec<RirRecord>,
    pub noises: Vec<NoiseRecord>,
}

impl SimulationManifest {
    pub fn from_records(records: impl IntoIterator<Item = ManifestRecord>) -> Self {
        let mut m = SimulationManifest::default();
        for r in records {
            match r {
                ManifestRecord::Utterance(u) => m.utterances.push(u),
                ManifestRecord::Rir(r) => m.rirs.push(r),
                ManifestRecord::Noise(n) => m.noises.push(n),
            }
        }
        m
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<SimulationManifest> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: ManifestRecord = serde_json::from_str(&line).map_err(|e| {
            Error::invalid_input(format!(
                "{}:{}: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        match &mut record {
            ManifestRecord::Utterance(u) => resolve(&base, &mut u.path),
            ManifestRecord::Rir(r) => resolve(&base, &mut r.path),
            ManifestRecord::Noise(n) => resolve(&base, &mut n.path),
        }
        records.push(record);
    }
    Ok(SimulationManifest::from_records(records))
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[ManifestRecord]) -> Result<()> {
    let mut file = std::fs::File::create(path.as_ref())?;
    for r in records {
        serde_json::to_writer(&mut file, r)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

fn resolve(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        *path = base.join(&path);
    }
}
