//! Static per-class loss weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::ClassStats;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Equal weights.
    Ew,
    /// Inverse class frequency.
    Icf,
    /// Ranking-based frequency.
    Rbf,
    /// Adaptive per-batch weights, see [`crate::famo`].
    Famo,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Ew, Strategy::Icf, Strategy::Rbf, Strategy::Famo];

    pub fn is_static(self) -> bool {
        !matches!(self, Strategy::Famo)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Ew => "EW",
            Strategy::Icf => "ICF",
            Strategy::Rbf => "RBF",
            Strategy::Famo => "FAMO",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ew" => Ok(Strategy::Ew),
            "icf" => Ok(Strategy::Icf),
            "rbf" => Ok(Strategy::Rbf),
            "famo" => Ok(Strategy::Famo),
            _ => Err(Error::InvalidConfig(format!(
                "unknown strategy `{s}` (expected ew, icf, rbf or famo)"
            ))),
        }
    }
}

/// One positive weight per class for the per-class BCE terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub strategy: Strategy,
    pub w: Vec<f64>,
}

impl LossWeights {
    pub fn new(strategy: Strategy, w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidConfig("weight vector is empty".into()));
        }
        if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "loss weights must be positive and finite, got {bad}"
            )));
        }
        Ok(LossWeights { strategy, w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        LossWeights::new(self.strategy, self.w.iter().map(|x| x * alpha).collect())
    }
}

pub fn ew_weights(num_classes: usize) -> Result<LossWeights> {
    if num_classes == 0 {
        return Err(Error::InvalidConfig("need at least one class".into()));
    }
    LossWeights::new(Strategy::Ew, vec![1.0; num_classes])
}

fn first_zero(stats: &ClassStats) -> Option<usize> {
    stats.positives.iter().position(|&p| p == 0)
}

pub fn icf_weights(stats: &ClassStats) -> Result<LossWeights> {
    icf_from_frequencies(&stats.frequencies()).map_err(|c| {
        Error::ZeroFrequency(
            stats
                .catalog
                .class_names
                .get(c)
                .cloned()
                .unwrap_or_default(),
        )
    })
}

/// `w_c = 1 / f_c`. Returns the index of the offending class if some `f_c` is 0.
pub fn icf_from_frequencies(freqs: &[f64]) -> std::result::Result<LossWeights, usize> {
    if let Some(c) = freqs.iter().position(|&f| f <= 0.0) {
        return Err(c);
    }
    LossWeights::new(Strategy::Icf, freqs.iter().map(|&f| 1.0 / f).collect()).map_err(|_| 0)
}

/// Mirrored-rank weights: classes sorted by descending frequency (ties kept
/// in catalog order), and the class at rank `k` receives the frequency of the
/// class at rank `C - 1 - k`.
pub fn rbf_weights(stats: &ClassStats) -> Result<LossWeights> {
    if stats.num_classes() == 0 || stats.total == 0 {
        return Err(Error::EmptyDataset("no classes to rank"));
    }
    if let Some(c) = first_zero(stats) {
        return Err(Error::ZeroFrequency(stats.catalog.class_names[c].clone()));
    }
    LossWeights::new(Strategy::Rbf, rbf_from_frequencies(&stats.frequencies()))
}

pub fn rbf_from_frequencies(freqs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    // stable: equal frequencies keep catalog order
    order.sort_by(|&a, &b| freqs[b].total_cmp(&freqs[a]));
    let mut w = vec![0.0; freqs.len()];
    for (rank, &class) in order.iter().enumerate() {
        w[class] = freqs[order[order.len() - 1 - rank]];
    }
    w
}

/// Static weights for `strategy`; FAMO has no static form.
pub fn static_weights(strategy: Strategy, stats: &ClassStats) -> Result<LossWeights> {
    match strategy {
        Strategy::Ew => ew_weights(stats.num_classes()),
        Strategy::Icf => icf_weights(stats),
        Strategy::Rbf => rbf_weights(stats),
        Strategy::Famo => Err(Error::InvalidConfig(
            "FAMO weights are adaptive, not static".into(),
        )),
    }
}
