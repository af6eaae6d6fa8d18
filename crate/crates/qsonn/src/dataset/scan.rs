//! Directory-tree scanners for the two dataset layouts.
//!
//! GSC ships official `validation_list.txt` / `testing_list.txt` files, which
//! define its splits. SSC has no official partition, so each class is
//! shuffled with a per-class seeded generator and cut 80/10/10.

use super::{label_id, ClipRecord, DatasetKind, DatasetManifest, Split, COMMANDS};
use crate::error::{Error, Result};
use crate::rng::{combine, SplitMix64};
use std::collections::HashSet;
use std::fs;
use std::path::Path;

/// Sorted `.wav` file names of one class directory; a missing directory
/// yields no clips.
fn class_files(root: &Path, class: &str) -> Result<Vec<String>> {
    let dir = root.join(class);
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut names = Vec::new();
    for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.to_ascii_lowercase().ends_with(".wav") {
            names.push(name);
        }
    }
    names.sort_unstable();
    Ok(names)
}

fn read_list(path: &Path) -> Result<HashSet<String>> {
    if !path.is_file() {
        return Err(Error::MissingList(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

/// Scan a Google-Speech-Commands-style tree: label folders plus the official
/// `validation_list.txt` and `testing_list.txt`. Clips named in those lists
/// go to val/test; everything else in the ten target folders goes to train.
/// Non-target folders are ignored.
pub fn scan_gsc(root: impl AsRef<Path>) -> Result<DatasetManifest> {
    let root = root.as_ref();
    let val_set = read_list(&root.join("validation_list.txt"))?;
    let test_set = read_list(&root.join("testing_list.txt"))?;

    let mut records = Vec::new();
    for class in COMMANDS {
        let label = label_id(class).unwrap();
        for name in class_files(root, class)? {
            let rel = format!("{class}/{name}");
            let split = if test_set.contains(&rel) {
                Split::Test
            } else if val_set.contains(&rel) {
                Split::Val
            } else {
                Split::Train
            };
            records.push(ClipRecord {
                path: root.join(&rel),
                label,
                split,
            });
        }
    }
    Ok(DatasetManifest {
        kind: DatasetKind::Gsc,
        records,
    })
}

/// Scan a Synthetic-Speech-Commands-style tree (label folders, no official
/// splits). Per class, file names are sorted, shuffled by a generator seeded
/// with `(seed, class id)`, and cut `floor(n/10)` val, `floor(n/10)` test,
/// remainder train. Seeding per class keeps one class's split independent of
/// the others.
pub fn scan_ssc(root: impl AsRef<Path>, seed: u64) -> Result<DatasetManifest> {
    let root = root.as_ref();
    let mut records = Vec::new();
    for class in COMMANDS {
        let label = label_id(class).unwrap();
        let mut names = class_files(root, class)?;
        let mut rng = SplitMix64::new(combine(&[seed, label as u64]));
        rng.shuffle(&mut names);
        let n = names.len();
        let n_val = n / 10;
        let n_test = n / 10;
        for (i, name) in names.into_iter().enumerate() {
            let split = if i < n_val {
                Split::Val
            } else if i < n_val + n_test {
                Split::Test
            } else {
                Split::Train
            };
            records.push(ClipRecord {
                path: root.join(class).join(name),
                label,
                split,
            });
        }
    }
    Ok(DatasetManifest {
        kind: DatasetKind::Ssc,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn make_tree(classes: &[(&str, usize)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (class, count) in classes {
            let cdir = dir.path().join(class);
            fs::create_dir_all(&cdir).unwrap();
            for i in 0..*count {
                fs::write(cdir.join(format!("clip{i:03}.wav")), b"stub").unwrap();
            }
        }
        dir
    }

    fn write_gsc_lists(root: &Path, val: &[&str], test: &[&str]) {
        fs::write(root.join("validation_list.txt"), val.join("\n")).unwrap();
        fs::write(root.join("testing_list.txt"), test.join("\n")).unwrap();
    }

    #[test]
    fn gsc_routes_listed_clips_and_ignores_non_targets() {
        let tree = make_tree(&[("on", 3), ("off", 3), ("bed", 5)]);
        write_gsc_lists(
            tree.path(),
            &["on/clip000.wav"],
            &["on/clip001.wav", "off/clip002.wav"],
        );
        let manifest = scan_gsc(tree.path()).unwrap();
        assert_eq!(manifest.records.len(), 6, "'bed' clips must be excluded");

        let by_name: HashMap<String, Split> = manifest
            .records
            .iter()
            .map(|r| {
                (
                    r.path
                        .strip_prefix(tree.path())
                        .unwrap()
                        .to_string_lossy()
                        .into_owned(),
                    r.split,
                )
            })
            .collect();
        assert_eq!(by_name["on/clip000.wav"], Split::Val);
        assert_eq!(by_name["on/clip001.wav"], Split::Test);
        assert_eq!(by_name["on/clip002.wav"], Split::Train);
        assert_eq!(by_name["off/clip002.wav"], Split::Test);
    }

    #[test]
    fn gsc_missing_lists_error() {
        let tree = make_tree(&[("on", 1)]);
        match scan_gsc(tree.path()) {
            Err(Error::MissingList(p)) => {
                assert!(p.ends_with("validation_list.txt"));
            }
            other => panic!("expected MissingListError, got {other:?}"),
        }
    }

    #[test]
    fn gsc_fixture_three_per_class() {
        let classes: Vec<(&str, usize)> = COMMANDS.iter().map(|&c| (c, 3)).collect();
        let tree = make_tree(&classes);
        write_gsc_lists(tree.path(), &[], &[]);
        let manifest = scan_gsc(tree.path()).unwrap();
        assert_eq!(manifest.records.len(), 30);
        for (id, name) in COMMANDS.iter().enumerate() {
            let count = manifest
                .records
                .iter()
                .filter(|r| r.label == id as u32)
                .count();
            assert_eq!(count, 3, "class {name}");
        }
    }

    #[test]
    fn ssc_exact_ratios_with_ten_clips() {
        let tree = make_tree(&[("on", 10)]);
        let manifest = scan_ssc(tree.path(), 5).unwrap();
        assert_eq!(manifest.split_len(Split::Train), 8);
        assert_eq!(manifest.split_len(Split::Val), 1);
        assert_eq!(manifest.split_len(Split::Test), 1);
    }

    #[test]
    fn ssc_rounding_rule_43_clips() {
        let tree = make_tree(&[("stop", 43)]);
        let manifest = scan_ssc(tree.path(), 5).unwrap();
        assert_eq!(manifest.split_len(Split::Val), 4);
        assert_eq!(manifest.split_len(Split::Test), 4);
        assert_eq!(manifest.split_len(Split::Train), 35);
    }

    #[test]
    fn ssc_is_seed_deterministic() {
        let tree = make_tree(&[("on", 30), ("go", 30)]);
        let by_path = |m: &DatasetManifest| -> HashMap<std::path::PathBuf, Split> {
            m.records
                .iter()
                .map(|r| (r.path.clone(), r.split))
                .collect()
        };
        let a = scan_ssc(tree.path(), 42).unwrap();
        let b = scan_ssc(tree.path(), 42).unwrap();
        assert_eq!(by_path(&a), by_path(&b));
        let c = scan_ssc(tree.path(), 43).unwrap();
        assert_ne!(
            by_path(&a),
            by_path(&c),
            "different seeds should move at least one clip"
        );
    }

    #[test]
    fn splits_are_disjoint_and_exhaustive() {
        let classes: Vec<(&str, usize)> = COMMANDS.iter().map(|&c| (c, 23)).collect();
        let tree = make_tree(&classes);
        let manifest = scan_ssc(tree.path(), 3).unwrap();
        let mut seen = HashSet::new();
        for r in &manifest.records {
            assert!(seen.insert(r.path.clone()), "{:?} appears twice", r.path);
        }
        assert_eq!(manifest.records.len(), 230);
        let total: usize = Split::ALL.iter().map(|&s| manifest.split_len(s)).sum();
        assert_eq!(total, 230);
    }

    #[test]
    fn full_coverage_has_no_warnings() {
        let classes: Vec<(&str, usize)> = COMMANDS.iter().map(|&c| (c, 20)).collect();
        let tree = make_tree(&classes);
        let manifest = scan_ssc(tree.path(), 3).unwrap();
        assert!(manifest.coverage_warnings().is_empty());

        let small = make_tree(&[("on", 10)]);
        let sparse = scan_ssc(small.path(), 3).unwrap();
        assert!(!sparse.coverage_warnings().is_empty());
    }
}
