//! Run manifests: the exact invocation plus digests of everything read and
//! written, so a run can be checked and regenerated.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use imaze_core::maze::hash_bytes;
use imaze_core::store::write_atomic;
use imaze_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub config: Option<FileDigest>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

pub fn file_digest(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hash_bytes(&bytes),
    })
}

/// Tracks the files one command touches.
#[derive(Debug, Default)]
pub struct Recorder {
    argv: Vec<String>,
    seed: Option<u64>,
    config: Option<FileDigest>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Recorder {
    pub fn new(argv: Vec<String>, seed: Option<u64>, config: Option<FileDigest>) -> Self {
        Recorder {
            argv,
            seed,
            config,
            ..Default::default()
        }
    }

    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.insert(path.display().to_string(), hash_bytes(&bytes));
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> Result<String> {
        String::from_utf8(self.read(path)?).map_err(|_| Error::Format(format!("{} is not UTF-8", path.display())))
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_atomic(path, bytes)?;
        self.outputs.insert(path.display().to_string(), hash_bytes(bytes));
        Ok(())
    }

    pub fn manifest(&self) -> Manifest {
        let list = |m: &BTreeMap<String, String>| {
            m.iter()
                .map(|(path, sha256)| FileDigest {
                    path: path.clone(),
                    sha256: sha256.clone(),
                })
                .collect()
        };
        Manifest {
            tool: "imaze".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.argv.clone(),
            seed: self.seed,
            config: self.config.clone(),
            inputs: list(&self.inputs),
            outputs: list(&self.outputs),
        }
    }

    /// Writes `<dir>/<name>.manifest.json` and returns its path.
    pub fn finish(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(format!("{name}.manifest.json"));
        let mut json = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        json.push('\n');
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_atomic(&path, json.as_bytes())?;
        Ok(path)
    }
}

/// Fails if any recorded file's current content differs from its digest.
pub fn verify(files: &[FileDigest], what: &str) -> Result<()> {
    let changed: Vec<&str> = files
        .iter()
        .filter(|f| file_digest(Path::new(&f.path)).map_or(true, |d| d.sha256 != f.sha256))
        .map(|f| f.path.as_str())
        .collect();
    if changed.is_empty() {
        Ok(())
    } else {
        Err(Error::HashMismatch(format!("{what} differ from the manifest: {}", changed.join(", "))))
    }
}
