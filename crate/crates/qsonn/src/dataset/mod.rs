//! Dataset ingestion: directory scanning, deterministic splits, the binary
//! feature cache, and mini-batch iteration.

mod batches;
mod cache;
mod scan;

pub use batches::{assemble_batch, epoch_batches};
pub use cache::{
    build_store, extract_split_features, read_cache_file, read_store, write_cache_file,
    write_store, FeatureStore, SplitFeatures,
};
pub use scan::{scan_gsc, scan_ssc};

use std::fmt;
use std::path::PathBuf;

/// The ten target commands; folder name order defines the class ids.
pub const COMMANDS: [&str; 10] = [
    "on", "off", "yes", "no", "left", "right", "up", "down", "stop", "go",
];

/// Class id of a command folder name, if it is one of the ten targets.
pub fn label_id(name: &str) -> Option<u32> {
    COMMANDS.iter().position(|&c| c == name).map(|i| i as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Split {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(crate::error::Error::Config(format!(
                "unknown split '{other}' (expected train, val or test)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Gsc,
    Ssc,
}

impl std::str::FromStr for DatasetKind {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gsc" => Ok(DatasetKind::Gsc),
            "ssc" => Ok(DatasetKind::Ssc),
            other => Err(crate::error::Error::Config(format!(
                "unknown dataset kind '{other}' (expected gsc or ssc)"
            ))),
        }
    }
}

/// One accepted clip.
#[derive(Debug, Clone)]
pub struct ClipRecord {
    pub path: PathBuf,
    pub label: u32,
    pub split: Split,
}

/// All accepted clips of a dataset with their split assignment.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub kind: DatasetKind,
    pub records: Vec<ClipRecord>,
}

impl DatasetManifest {
    pub fn split_records(&self, split: Split) -> impl Iterator<Item = &ClipRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn split_len(&self, split: Split) -> usize {
        self.split_records(split).count()
    }

    /// Classes missing from any split. Real datasets cover every class in
    /// every split; tiny fixtures may not, which is worth a warning but not
    /// an error.
    pub fn coverage_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for split in Split::ALL {
            for (id, name) in COMMANDS.iter().enumerate() {
                if !self.split_records(split).any(|r| r.label == id as u32) {
                    warnings.push(format!("class '{name}' has no clips in split {split}"));
                }
            }
        }
        warnings
    }
}
