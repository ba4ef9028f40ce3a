//! TOML run configuration. Every field is optional; command-line flags win.

use std::path::{Path, PathBuf};

use imaze_core::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub data: DataPaths,
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub suites: Vec<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub frequency: Option<PathBuf>,
    pub rt_log: Option<PathBuf>,
    pub materials: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub aggregation: Option<String>,
    pub n_boot: Option<usize>,
    pub level: Option<f64>,
    pub max_rt: Option<f64>,
}

impl RunConfig {
    /// Parses `text`; relative data paths are taken relative to the working directory.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {}", e.message())))
    }

    /// Loads and checks that every referenced data path exists.
    pub fn load(path: &Path, text: &str) -> Result<Self> {
        let config = Self::parse(text)?;
        let d = &config.data;
        let paths = d
            .suites
            .iter()
            .chain(&d.corpus)
            .chain(&d.frequency)
            .chain(&d.rt_log)
            .chain(&d.materials);
        for p in paths {
            if !p.exists() {
                return Err(Error::MissingEntry(format!(
                    "{} references {} which does not exist",
                    path.display(),
                    p.display()
                )));
            }
        }
        Ok(config)
    }
}
