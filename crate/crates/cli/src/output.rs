//! Run directories: `{output_dir}/{kind}/{timestamp}/` with numbered
//! artifacts, `summary.json`, `manifest.json` and a sibling `latest` file
//! naming the most recent run.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use pseudospin::io::content_hash;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactEntry {
    /// Path relative to the run directory.
    pub path: String,
    pub role: String,
    pub bytes: usize,
    pub content_hash: String,
}

/// A sweep element or analysis step that did not complete.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub index: usize,
    pub label: String,
    pub stage: String,
    pub error: String,
}

impl Failure {
    pub fn new(index: usize, label: impl Into<String>, stage: &str, error: impl ToString) -> Self {
        Self {
            index,
            label: label.into(),
            stage: stage.to_string(),
            error: error.to_string(),
        }
    }
}

/// Contents of `manifest.json`. Holds no timestamps so that identical
/// inputs give an identical manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool_version: &'static str,
    pub kind: String,
    pub config_hash: String,
    pub artifacts: Vec<ArtifactEntry>,
    pub failures: Vec<Failure>,
}

pub struct RunDir {
    root: PathBuf,
    name: String,
    kind_dir: PathBuf,
    artifacts: Vec<ArtifactEntry>,
}

impl RunDir {
    /// Creates a fresh timestamped directory under `{output_dir}/{kind}`.
    pub fn create(output_dir: &Path, kind: &str) -> Result<Self> {
        let kind_dir = output_dir.join(kind);
        fs::create_dir_all(&kind_dir).with_context(|| format!("creating {}", kind_dir.display()))?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
        let mut name = stamp.clone();
        let mut k = 1;
        // create_dir fails on an existing directory, so concurrent runs never share one
        loop {
            match fs::create_dir(kind_dir.join(&name)) {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    name = format!("{stamp}-{k}");
                    k += 1;
                }
                Err(e) => return Err(e).with_context(|| format!("creating run directory in {}", kind_dir.display())),
            }
        }
        Ok(Self {
            root: kind_dir.join(&name),
            name,
            kind_dir,
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, role: &str, contents: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(ArtifactEntry {
            path: name.to_string(),
            role: role.to_string(),
            bytes: contents.len(),
            content_hash: content_hash(contents),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, role: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, role, text.as_bytes())
    }

    /// Writes the summary, then the manifest, then repoints `latest`.
    pub fn finish(mut self, kind: &str, config_hash: String, failures: Vec<Failure>, summary: &serde_json::Value) -> Result<PathBuf> {
        self.write_json("summary.json", "summary", summary)?;
        let manifest = Manifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            kind: kind.to_string(),
            config_hash,
            artifacts: self.artifacts,
            failures,
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.root.join("manifest.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        let latest = self.kind_dir.join("latest");
        fs::write(&latest, format!("{}\n", self.name)).with_context(|| format!("writing {}", latest.display()))?;
        Ok(self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_dir_layout_and_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let mut dir = RunDir::create(tmp.path(), "fid").unwrap();
        dir.write("0.csv", "trace", b"t_s\n0e0\n").unwrap();
        let root = dir.finish("fid", "abc".into(), vec![], &serde_json::json!({"x": 1})).unwrap();
        let latest = fs::read_to_string(tmp.path().join("fid/latest")).unwrap();
        assert_eq!(tmp.path().join("fid").join(latest.trim()), root);
        let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(root.join("manifest.json")).unwrap()).unwrap();
        let arts = manifest["artifacts"].as_array().unwrap();
        assert_eq!(arts.len(), 2);
        assert_eq!(arts[0]["content_hash"], content_hash(b"t_s\n0e0\n"));
        assert_eq!(arts[1]["path"], "summary.json");
    }

    #[test]
    fn back_to_back_runs_get_distinct_directories() {
        let tmp = tempfile::tempdir().unwrap();
        let a = RunDir::create(tmp.path(), "fid").unwrap();
        let b = RunDir::create(tmp.path(), "fid").unwrap();
        assert_ne!(a.path(), b.path());
    }
}
