//! Signed feature hashing of comment text.
//!
//! Each unigram (and optionally each adjacent-token bigram, joined by a single
//! space) is hashed with seeded XXH64. The low bits of the hash select the
//! bucket (`hash & (dims - 1)`), bit 63 selects the sign. Values accumulate per
//! bucket and the vector is optionally scaled to unit L2 norm.

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh64::xxh64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizerConfig {
    pub dims: usize,
    pub ngram_max: u8,
    pub lowercase: bool,
    pub l2_normalize: bool,
    pub seed: u64,
}

impl Default for FeaturizerConfig {
    fn default() -> Self {
        FeaturizerConfig {
            dims: 1 << 18,
            ngram_max: 1,
            lowercase: true,
            l2_normalize: true,
            seed: 0,
        }
    }
}

impl FeaturizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims < 2 || !self.dims.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "feature dims must be a power of two >= 2, got {}",
                self.dims
            )));
        }
        if self.dims > 1 << 32 {
            return Err(Error::InvalidConfig("feature dims above 2^32".into()));
        }
        if !(1..=2).contains(&self.ngram_max) {
            return Err(Error::InvalidConfig(format!(
                "ngram_max must be 1 or 2, got {}",
                self.ngram_max
            )));
        }
        Ok(())
    }
}

/// Sparse vector with entries sorted by index and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dims: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector from arbitrary `(index, value)` pairs. Duplicate
    /// indices are summed and zeros dropped.
    pub fn from_pairs(dims: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for (i, v) in pairs {
            if i >= dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: i + 1,
                });
            }
            entries.push((i as u32, v));
        }
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Ok(SparseVector {
            dims,
            entries: merged,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Dot product with a dense slice of length `dims`.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| dense[i as usize] * v)
            .sum()
    }
}

pub fn tokenize(text: &str, config: &FeaturizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if config.lowercase {
                t.to_lowercase()
            } else {
                t.to_string()
            }
        })
        .collect()
}

/// The n-gram strings that get hashed for `text`.
pub fn ngrams(text: &str, config: &FeaturizerConfig) -> Vec<String> {
    let tokens = tokenize(text, config);
    let mut grams = tokens.clone();
    if config.ngram_max >= 2 {
        grams.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    grams
}

/// Bucket and sign of one n-gram.
pub fn hash_feature(gram: &str, config: &FeaturizerConfig) -> (usize, f64) {
    let h = xxh64(gram.as_bytes(), config.seed);
    let index = (h & (config.dims as u64 - 1)) as usize;
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    (index, sign)
}

pub fn featurize(text: &str, config: &FeaturizerConfig) -> SparseVector {
    let pairs = ngrams(text, config)
        .iter()
        .map(|g| hash_feature(g, config))
        .collect::<Vec<_>>();
    let mut v =
        SparseVector::from_pairs(config.dims, pairs).expect("hashed indices are masked below dims");
    if config.l2_normalize {
        let norm = v.norm();
        if norm > 0.0 {
            for (_, x) in v.entries.iter_mut() {
                *x /= norm;
            }
        }
    }
    v
}
