use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub class_counts: [usize; NUM_CLASSES],
    /// Directory that relative entry paths are resolved against.
    pub base_dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    entries: Vec<ManifestEntry>,
    // Accepted for compatibility but never trusted.
    #[serde(default, skip_serializing)]
    #[allow(dead_code)]
    class_counts: Option<serde_json::Value>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut class_counts = [0; NUM_CLASSES];
        for e in &entries {
            if !seen.insert(e.path.as_str()) {
                return Err(Error::parse("manifest", format!("duplicate path {:?}", e.path)));
            }
            class_counts[e.label.index()] += 1;
        }
        Ok(DatasetManifest {
            entries,
            class_counts,
            base_dir: base_dir.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn record_path(&self, index: usize) -> PathBuf {
        self.base_dir.join(&self.entries[index].path)
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn to_json(&self) -> String {
        let file = ManifestFile {
            entries: self.entries.clone(),
            class_counts: None,
        };
        serde_json::to_string_pretty(&file).expect("manifest serializes")
    }
}

/// Parses manifest JSON; class counts are always recomputed from the entries.
pub fn parse_manifest(text: &str, base_dir: impl Into<PathBuf>) -> Result<DatasetManifest> {
    let file: ManifestFile = serde_json::from_str(text).map_err(|e| Error::parse("manifest", e))?;
    DatasetManifest::new(file.entries, base_dir)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let manifest = parse_manifest(&text, base)?;
    for i in 0..manifest.len() {
        let p = manifest.record_path(i);
        if !p.is_file() {
            return Err(Error::MissingRecord(p));
        }
    }
    Ok(manifest)
}

pub fn save_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = manifest.to_json();
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn tallies_one_per_class() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["a.csv", "b.csv", "c.csv"] {
            write(dir.path(), n, "");
        }
        write(
            dir.path(),
            "m.json",
            r#"{"entries":[{"path":"a.csv","label":0},{"path":"b.csv","label":1},{"path":"c.csv","label":2}]}"#,
        );
        let m = load_manifest(dir.path().join("m.json")).unwrap();
        assert_eq!(m.class_counts, [1, 1, 1]);
        assert_eq!(m.record_path(1), dir.path().join("b.csv"));
    }

    #[test]
    fn empty_entries() {
        let m = parse_manifest(r#"{"entries":[]}"#, "").unwrap();
        assert_eq!(m.class_counts, [0, 0, 0]);
        assert!(m.is_empty());
    }

    #[test]
    fn stored_counts_are_ignored() {
        let m = parse_manifest(
            r#"{"entries":[{"path":"a","label":2},{"path":"b","label":2}],"class_counts":[9,9,9]}"#,
            "",
        )
        .unwrap();
        assert_eq!(m.class_counts, [0, 0, 2]);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_manifest("{", ""), Err(Error::Parse { .. })));
        assert!(parse_manifest(r#"{"entries":[{"path":"a","label":5}]}"#, "").is_err());
        assert!(parse_manifest(
            r#"{"entries":[{"path":"a","label":0},{"path":"a","label":1}]}"#,
            ""
        )
        .is_err());
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "m.json", r#"{"entries":[{"path":"gone.csv","label":0}]}"#);
        assert!(matches!(
            load_manifest(dir.path().join("m.json")),
            Err(Error::MissingRecord(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let m = parse_manifest(r#"{"entries":[{"path":"x/a.csv","label":1}]}"#, "base").unwrap();
        let again = parse_manifest(&m.to_json(), "base").unwrap();
        assert_eq!(m, again);
    }
}
