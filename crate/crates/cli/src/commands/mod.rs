//! Subcommand implementations and the helpers they share.

pub mod evaluate;
pub mod score;
pub mod search;
pub mod stats;
pub mod train;
pub mod weights;

use std::path::Path;

use anyhow::{bail, Context, Result};
use commentweight_core::corpus::split_rows;
use commentweight_core::{
    load_dataset, FeaturizerConfig, LabeledComment, Language, Split, Strategy,
};

use crate::config::FeaturizerSection;
use crate::{FeaturizerArgs, SplitChoice, StatsSource};

pub fn load_rows(path: &Path, language: Language) -> Result<Vec<LabeledComment>> {
    load_dataset(path, language).with_context(|| format!("loading {}", path.display()))
}

pub fn select_split(rows: &[LabeledComment], split: SplitChoice) -> Vec<LabeledComment> {
    match split {
        SplitChoice::All => rows.to_vec(),
        SplitChoice::Train => split_rows(rows, Split::Train),
        SplitChoice::Test => split_rows(rows, Split::Test),
    }
}

pub fn parse_strategy(s: &str) -> Result<Strategy> {
    Ok(s.parse::<Strategy>()?)
}

pub fn parse_stats_source(s: &str) -> Result<StatsSource> {
    match s.to_ascii_lowercase().as_str() {
        "train" => Ok(StatsSource::Train),
        "all" => Ok(StatsSource::All),
        other => bail!("weight_stats must be \"train\" or \"all\", got {other:?}"),
    }
}

/// Flag, then config file, then default.
pub fn featurizer_config(
    flags: &FeaturizerArgs,
    file: &FeaturizerSection,
) -> Result<FeaturizerConfig> {
    let d = FeaturizerConfig::default();
    let cfg = FeaturizerConfig {
        dims: flags.dims.or(file.dims).unwrap_or(d.dims),
        ngram_max: flags.ngram_max.or(file.ngram_max).unwrap_or(d.ngram_max),
        lowercase: if flags.no_lowercase {
            false
        } else {
            file.lowercase.unwrap_or(d.lowercase)
        },
        l2_normalize: if flags.no_l2_normalize {
            false
        } else {
            file.l2_normalize.unwrap_or(d.l2_normalize)
        },
        seed: flags.hash_seed.or(file.seed).unwrap_or(d.seed),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn to_json(value: &impl serde::Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// `9027` -> `9,027`.
pub fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
