//! The dataset manifest: a tab-separated catalog of every record.
//!
//! `manifest.tsv` sits at the dataset root; each row names one cropped cube
//! and its labels. Paths inside the manifest are relative to that root, so
//! dataset directories can be moved wholesale.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Exact header row of `manifest.tsv`.
pub const MANIFEST_HEADER: &str =
    "record_id\ttest_id\tantenna_id\tclass_label\tcrop_index\tcube_path";

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub record_id: String,
    pub test_id: usize,
    pub antenna_id: usize,
    pub class_label: usize,
    pub crop_index: usize,
    /// Cube file path relative to the dataset root.
    pub cube_path: String,
}

impl ManifestRecord {
    /// Path of this record's Doppler spectrogram, relative to the dataset
    /// root (sibling directory to the cubes, same record id).
    pub fn spectrogram_path(&self) -> String {
        format!("spectrograms/{}.trdc", self.record_id)
    }
}

/// A parsed dataset catalog plus the root it is relative to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub records: Vec<ManifestRecord>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad manifest header: expected {MANIFEST_HEADER:?}, found {found:?}")]
    BadHeader { found: String },
    #[error("manifest line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate record id {0:?}")]
    DuplicateRecordId(String),
    #[error("manifest contains no records")]
    Empty,
}

impl DatasetManifest {
    /// Reads and parses `<root>/manifest.tsv`.
    pub fn load(root: &Path) -> Result<Self, ManifestError> {
        let text = fs::read_to_string(root.join("manifest.tsv"))?;
        Self::parse(&text, root)
    }

    /// Parses manifest text; `root` is recorded for path resolution.
    pub fn parse(text: &str, root: &Path) -> Result<Self, ManifestError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != MANIFEST_HEADER {
            return Err(ManifestError::BadHeader { found: header.to_string() });
        }

        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for (offset, line) in lines.enumerate() {
            let line_no = offset + 2; // 1-based, after the header
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(ManifestError::Parse {
                    line: line_no,
                    message: format!("expected 6 tab-separated fields, found {}", fields.len()),
                });
            }
            let number = |index: usize, name: &str| {
                fields[index].parse::<usize>().map_err(|e| ManifestError::Parse {
                    line: line_no,
                    message: format!("bad {name} {:?}: {e}", fields[index]),
                })
            };
            let record = ManifestRecord {
                record_id: fields[0].to_string(),
                test_id: number(1, "test_id")?,
                antenna_id: number(2, "antenna_id")?,
                class_label: number(3, "class_label")?,
                crop_index: number(4, "crop_index")?,
                cube_path: fields[5].to_string(),
            };
            if !seen.insert(record.record_id.clone()) {
                return Err(ManifestError::DuplicateRecordId(record.record_id));
            }
            records.push(record);
        }
        if records.is_empty() {
            return Err(ManifestError::Empty);
        }
        Ok(Self { root: root.to_path_buf(), records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of classes implied by the labels (max label + 1).
    pub fn classes(&self) -> usize {
        self.records.iter().map(|r| r.class_label + 1).max().unwrap_or(0)
    }

    /// Sorted, deduplicated antenna ids present in the manifest.
    pub fn antenna_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.records.iter().map(|r| r.antenna_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Absolute path of record `index`'s cube file.
    pub fn cube_file(&self, index: usize) -> PathBuf {
        self.root.join(&self.records[index].cube_path)
    }

    /// Absolute path of record `index`'s spectrogram file.
    pub fn spectrogram_file(&self, index: usize) -> PathBuf {
        self.root.join(self.records[index].spectrogram_path())
    }
}
