//! Feature extraction over a manifest and the on-disk feature cache.
//!
//! MFCC extraction dominates epoch time for a network this small, so
//! features are extracted once per split and stored in a binary cache file
//! stamped with the frontend-config fingerprint; a config change invalidates
//! stale caches. Cache layout (little-endian):
//!
//! ```text
//! magic        8 bytes  "QSFCACHE"
//! version      u32      currently 1
//! fingerprint  u64      frontend config hash
//! count        u32
//! shape        3 x u32  feature dims, e.g. 1 x 20 x 51
//! record       label u32, path_len u32, path utf-8, values f32 x numel
//! ```

use super::{DatasetManifest, Split};
use crate::audio::{extract_feature, FrontendConfig, MfccFeature};
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"QSFCACHE";
const VERSION: u32 = 1;

/// Extracted features of one split, kept in manifest order.
#[derive(Debug, Clone, Default)]
pub struct SplitFeatures {
    pub features: Vec<Tensor<f32>>,
    pub labels: Vec<u32>,
    pub paths: Vec<String>,
}

impl SplitFeatures {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn push(&mut self, feature: MfccFeature) {
        self.features.push(feature.values);
        self.labels.push(feature.label);
        self.paths.push(feature.source_path);
    }
}

/// Features for all three splits.
#[derive(Debug, Clone, Default)]
pub struct FeatureStore {
    pub train: SplitFeatures,
    pub val: SplitFeatures,
    pub test: SplitFeatures,
}

impl FeatureStore {
    pub fn split(&self, split: Split) -> &SplitFeatures {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }
}

/// Run the frontend over every clip of one split, in manifest order.
pub fn extract_split_features(
    manifest: &DatasetManifest,
    split: Split,
    config: &FrontendConfig,
) -> Result<SplitFeatures> {
    let mut out = SplitFeatures::default();
    for record in manifest.split_records(split) {
        let bytes = fs::read(&record.path).map_err(|e| Error::io(&record.path, e))?;
        let values = extract_feature(&bytes, config)
            .map_err(|e| Error::Format(format!("{}: {e}", record.path.display())))?;
        out.push(MfccFeature {
            values,
            source_path: record.path.to_string_lossy().into_owned(),
            label: record.label,
        });
    }
    Ok(out)
}

/// Extract all three splits into memory.
pub fn build_store(manifest: &DatasetManifest, config: &FrontendConfig) -> Result<FeatureStore> {
    Ok(FeatureStore {
        train: extract_split_features(manifest, Split::Train, config)?,
        val: extract_split_features(manifest, Split::Val, config)?,
        test: extract_split_features(manifest, Split::Test, config)?,
    })
}

/// Serialize one split's features.
pub fn write_cache_file(
    path: impl AsRef<Path>,
    split: &SplitFeatures,
    fingerprint: u64,
) -> Result<()> {
    let path = path.as_ref();
    let shape: Vec<usize> = split
        .features
        .first()
        .map(|f| f.shape().to_vec())
        .unwrap_or_else(|| vec![1, 20, 51]);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&fingerprint.to_le_bytes());
    out.extend_from_slice(&(split.len() as u32).to_le_bytes());
    for &d in &shape {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for ((feature, &label), path_str) in split.features.iter().zip(&split.labels).zip(&split.paths)
    {
        if feature.shape() != shape.as_slice() {
            return Err(Error::Shape(format!(
                "feature shape {:?} differs from cache shape {shape:?}",
                feature.shape()
            )));
        }
        out.extend_from_slice(&label.to_le_bytes());
        out.extend_from_slice(&(path_str.len() as u32).to_le_bytes());
        out.extend_from_slice(path_str.as_bytes());
        for &v in feature.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read one split's features back, refusing stale caches whose fingerprint
/// does not match the current frontend config.
pub fn read_cache_file(path: impl AsRef<Path>, expected_fingerprint: u64) -> Result<SplitFeatures> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > bytes.len() {
            return Err(Error::Format(format!(
                "{}: cache truncated at offset {}",
                path.display(),
                *pos
            )));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };

    if take(&mut pos, 8)? != MAGIC {
        return Err(Error::Format(format!(
            "{}: not a feature cache (bad magic)",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported cache version {version}",
            path.display()
        )));
    }
    let fingerprint = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    if fingerprint != expected_fingerprint {
        return Err(Error::Format(format!(
            "{}: cache was built with a different frontend config (fingerprint {fingerprint:016x}, expected {expected_fingerprint:016x}); re-run preprocessing",
            path.display()
        )));
    }
    let count = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let mut shape = [0usize; 3];
    for d in &mut shape {
        *d = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    }
    let numel: usize = shape.iter().product();

    let mut out = SplitFeatures::default();
    for _ in 0..count {
        let label = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        let path_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let path_str = String::from_utf8(take(&mut pos, path_len)?.to_vec())
            .map_err(|_| Error::Format(format!("{}: clip path is not utf-8", path.display())))?;
        let payload = take(&mut pos, numel * 4)?;
        let data: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let feature = Tensor::new(&shape, data).map_err(|e| {
            Error::Format(format!("{}: corrupt feature record: {e}", path.display()))
        })?;
        out.features.push(feature);
        out.labels.push(label);
        out.paths.push(path_str);
    }
    if pos != bytes.len() {
        return Err(Error::Format(format!(
            "{}: trailing bytes in cache",
            path.display()
        )));
    }
    Ok(out)
}

fn split_file(dir: &Path, split: Split) -> std::path::PathBuf {
    dir.join(format!("{split}.qsfc"))
}

/// Write one cache file per split into `dir`.
pub fn write_store(
    dir: impl AsRef<Path>,
    store: &FeatureStore,
    config: &FrontendConfig,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let fp = config.fingerprint();
    for split in Split::ALL {
        write_cache_file(split_file(dir, split), store.split(split), fp)?;
    }
    Ok(())
}

/// Read all three split caches from `dir`.
pub fn read_store(dir: impl AsRef<Path>, config: &FrontendConfig) -> Result<FeatureStore> {
    let dir = dir.as_ref();
    let fp = config.fingerprint();
    Ok(FeatureStore {
        train: read_cache_file(split_file(dir, Split::Train), fp)?,
        val: read_cache_file(split_file(dir, Split::Val), fp)?,
        test: read_cache_file(split_file(dir, Split::Test), fp)?,
    })
}
