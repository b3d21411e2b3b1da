//! Pipeline settings: command-line flags over an optional TOML file over
//! built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use pcdm_core::naming::load_naming_table;
use pcdm_core::pcdm::PcdmConfig;
use serde::Deserialize;

/// Flags shared by every command that runs the metric.
#[derive(Args, Debug, Clone, Default)]
pub struct PipelineArgs {
    /// Sampling rate applied to both images before comparison, in (0, 1].
    #[arg(long)]
    pub rate: Option<f64>,
    /// Color-naming table (text format, one bin per line).
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
    /// Weight of the thresholded CIEDE2000 term, in [0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Logistic steepness.
    #[arg(long)]
    pub z: Option<f64>,
    /// CIEDE2000 saturation threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// TOML file with any of: sampling_rate, alpha, z, de_threshold, table.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    sampling_rate: Option<f64>,
    alpha: Option<f64>,
    z: Option<f64>,
    de_threshold: Option<f64>,
    table: Option<PathBuf>,
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    // A relative table path in the file is relative to the file.
    if let (Some(table), Some(dir)) = (cfg.table.as_mut(), path.parent()) {
        if table.is_relative() {
            *table = dir.join(&*table);
        }
    }
    Ok(cfg)
}

impl PipelineArgs {
    pub fn resolve(&self) -> Result<PcdmConfig> {
        let file = match &self.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let mut cfg = match self.table.as_ref().or(file.table.as_ref()) {
            Some(path) => {
                let table = load_naming_table(path).with_context(|| format!("loading naming table {}", path.display()))?;
                PcdmConfig::from_table(table).context("deriving ground distances from the naming table")?
            }
            None => PcdmConfig::default(),
        };
        if let Some(v) = self.rate.or(file.sampling_rate) {
            cfg.sampling_rate = v;
        }
        if let Some(v) = self.alpha.or(file.alpha) {
            cfg.alpha = v;
        }
        if let Some(v) = self.z.or(file.z) {
            cfg.z = v;
        }
        if let Some(v) = self.threshold.or(file.de_threshold) {
            cfg.de_threshold = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
