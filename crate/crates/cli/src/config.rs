//! Optional TOML configuration file.
//!
//! Every field is optional. Precedence is command-line flag, then this file,
//! then the built-in default.

use std::path::Path;

use anyhow::{Context, Result};
use commentweight_core::search::Grid;
use commentweight_core::ScoreFormula;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub featurizer: FeaturizerSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub search: SearchSection,
    pub score: Option<ScoreFormula>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturizerSection {
    pub dims: Option<usize>,
    pub ngram_max: Option<u8>,
    pub lowercase: Option<bool>,
    pub l2_normalize: Option<bool>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub weight_decay: Option<f64>,
    pub strategy: Option<String>,
    pub famo_alpha: Option<f64>,
    pub famo_gamma: Option<f64>,
    pub seed: Option<u64>,
    pub lr_scale: Option<f64>,
    pub weight_stats: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub strategy: Option<String>,
    pub select_mode: Option<String>,
    pub parallelism: Option<usize>,
    pub lr_scale: Option<f64>,
    pub seed: Option<u64>,
    pub grid: Option<Grid>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}

/// Reads a score formula from a standalone TOML file.
pub fn load_formula(path: &Path) -> Result<ScoreFormula> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading score formula {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing score formula {}", path.display()))
}
