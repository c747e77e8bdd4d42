//! A dataset directory: `manifest.json` plus one JSON-Lines file per sequence.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_sequence, write_sequence};
use crate::point::{RadarExtrinsics, RadarFrame};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub name: String,
    pub file: String,
    pub frames: usize,
    pub points: usize,
    pub extrinsics: RadarExtrinsics,
    /// Per-sequence training weight.
    #[serde(default = "one")]
    pub sample_weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub config_hash: Option<String>,
    pub sequences: Vec<SequenceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<RadarFrame>,
    pub extrinsics: RadarExtrinsics,
    pub sample_weight: f64,
}

impl Sequence {
    pub fn new(name: impl Into<String>, frames: Vec<RadarFrame>, extrinsics: RadarExtrinsics) -> Self {
        Self {
            name: name.into(),
            frames,
            extrinsics,
            sample_weight: 1.0,
        }
    }

    pub fn entry(&self) -> SequenceEntry {
        SequenceEntry {
            name: self.name.clone(),
            file: format!("{}.jsonl", self.name),
            frames: self.frames.len(),
            points: self.frames.iter().map(RadarFrame::len).sum(),
            extrinsics: self.extrinsics,
            sample_weight: self.sample_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    pub sequences: Vec<Sequence>,
}

impl Dataset {
    pub fn new(sequences: Vec<Sequence>) -> Self {
        Self {
            seed: None,
            config_hash: None,
            sequences,
        }
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            version: MANIFEST_VERSION,
            seed: self.seed,
            config_hash: self.config_hash.clone(),
            sequences: self.sequences.iter().map(Sequence::entry).collect(),
        }
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<Manifest> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = self.manifest();
        for (seq, entry) in self.sequences.iter().zip(&manifest.sequences) {
            write_sequence(dir.join(&entry.file), &seq.frames)?;
        }
        write_json(dir.join(MANIFEST_FILE), &manifest)?;
        Ok(manifest)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = read_json(dir.join(MANIFEST_FILE))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Version {
                what: "dataset manifest",
                found: manifest.version,
                expected: MANIFEST_VERSION,
            });
        }
        let sequences = manifest
            .sequences
            .iter()
            .map(|e| {
                Ok(Sequence {
                    name: e.name.clone(),
                    frames: read_sequence(dir.join(&e.file))?,
                    extrinsics: e.extrinsics,
                    sample_weight: e.sample_weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            seed: manifest.seed,
            config_hash: manifest.config_hash,
            sequences,
        })
    }
}

pub(crate) fn write_json<T: Serialize>(path: impl Into<PathBuf>, value: &T) -> Result<()> {
    let path = path.into();
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: impl Into<PathBuf>) -> Result<T> {
    let path = path.into();
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        context: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::RadarPoint;

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let frames = vec![
            RadarFrame::new(0.0, vec![RadarPoint::new(1.0, 0.2, -1.0)]),
            RadarFrame::new(0.06, vec![]),
        ];
        let mut seq = Sequence::new("seq_000", frames, RadarExtrinsics::default());
        seq.sample_weight = 0.5;
        let ds = Dataset::new(vec![seq]);
        let manifest = ds.save(dir.path()).unwrap();
        assert_eq!(manifest.sequences[0].frames, 2);
        assert_eq!(manifest.sequences[0].points, 1);
        assert_eq!(Dataset::load(dir.path()).unwrap(), ds);
    }

    #[test]
    fn manifest_version_checked() {
        let dir = tempfile::tempdir().unwrap();
        Dataset::new(vec![]).save(dir.path()).unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).unwrap().replace("\"version\": 1", "\"version\": 9");
        fs::write(&path, text).unwrap();
        assert!(matches!(Dataset::load(dir.path()), Err(Error::Version { found: 9, .. })));
    }
}
