//! JSON run configuration. Every field is optional; command-line flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Base directory for relative input paths.
    pub data_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub quiet: Option<bool>,
    pub stamp: Option<bool>,
    pub generator: GeneratorConfig,
    pub method: Option<String>,
    pub input: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub fit_on: Option<PathBuf>,
    pub train: TrainSection,
    pub cluster: ClusterSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_per_class: Option<usize>,
    pub counts: Option<Vec<usize>>,
    pub augment_to: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub arch: Option<String>,
    pub learning_rate: Option<f64>,
    pub momentum: Option<f64>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub validation_fraction: Option<f64>,
    pub freeze: Option<String>,
    pub init_from: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub ratios: Option<bool>,
    pub outlier_z: Option<f64>,
    pub pca: Option<String>,
    pub k: Option<usize>,
    pub select_k: Option<String>,
    pub criterion: Option<String>,
    pub fuzzy: Option<bool>,
    pub c: Option<usize>,
    pub fuzzifier: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    /// Resolves a config-supplied input path against `data_dir`.
    pub fn data_path(&self, p: &Path) -> PathBuf {
        match &self.data_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}
