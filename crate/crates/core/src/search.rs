//! Exhaustive hyperparameter grid search.
//!
//! Configurations are enumerated in lexicographic order over
//! `(batch_size, epochs, learning_rate, weight_decay[, famo_alpha, famo_gamma])`.
//! Run `i` trains with seed `base_seed + i`. Runs execute on a bounded worker
//! pool and are merged by enumeration index, so the result does not depend on
//! the pool size or completion order. Ranking is by average F1, descending,
//! with ties kept in enumeration order and failed runs last.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassStats, LabeledComment};
use crate::error::{Error, Result};
use crate::famo::{ALPHA_GRID, GAMMA_GRID};
use crate::featurizer::FeaturizerConfig;
use crate::metrics::EvalReport;
use crate::trainer::{evaluate_featurized, train_featurized, FeaturizedRows, TrainConfig};
use crate::weighting::Strategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub batch_sizes: Vec<usize>,
    pub epochs: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub weight_decays: Vec<f64>,
    pub famo_alphas: Vec<f64>,
    pub famo_gammas: Vec<f64>,
}

impl Default for Grid {
    /// The full search space: 180 static configurations, 1,620 adaptive ones.
    fn default() -> Self {
        Grid {
            batch_sizes: vec![1, 2, 4, 8, 16],
            epochs: vec![1, 3, 5, 10],
            learning_rates: vec![3e-5, 4e-5, 5e-5],
            weight_decays: vec![0.0, 0.01, 0.001],
            famo_alphas: ALPHA_GRID.to_vec(),
            famo_gammas: GAMMA_GRID.to_vec(),
        }
    }
}

impl Grid {
    pub fn base_size(&self) -> usize {
        self.batch_sizes.len()
            * self.epochs.len()
            * self.learning_rates.len()
            * self.weight_decays.len()
    }

    pub fn size(&self, strategy: Strategy) -> usize {
        match strategy {
            Strategy::Famo => self.base_size() * self.famo_alphas.len() * self.famo_gammas.len(),
            _ => self.base_size(),
        }
    }
}

/// Cartesian product of the grid for one strategy. Seeds are left at 0.
pub fn enumerate(grid: &Grid, strategy: Strategy) -> Vec<TrainConfig> {
    let famo: Vec<(Option<f64>, Option<f64>)> = if strategy == Strategy::Famo {
        grid.famo_alphas
            .iter()
            .flat_map(|&a| grid.famo_gammas.iter().map(move |&g| (Some(a), Some(g))))
            .collect()
    } else {
        vec![(None, None)]
    };
    let mut out = Vec::with_capacity(grid.size(strategy));
    for &batch_size in &grid.batch_sizes {
        for &epochs in &grid.epochs {
            for &learning_rate in &grid.learning_rates {
                for &weight_decay in &grid.weight_decays {
                    for &(famo_alpha, famo_gamma) in &famo {
                        out.push(TrainConfig {
                            batch_size,
                            epochs,
                            learning_rate,
                            weight_decay,
                            strategy,
                            famo_alpha,
                            famo_gamma,
                            seed: 0,
                            lr_scale: 1.0,
                            record_batches: false,
                        });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub base_seed: u64,
    pub lr_scale: f64,
    pub parallelism: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            base_seed: 0,
            lr_scale: 1.0,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    /// Position in the enumeration.
    pub index: usize,
    pub config: TrainConfig,
    pub average_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<EvalReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Ranked best first.
    pub entries: Vec<SearchEntry>,
}

impl SearchResult {
    pub fn best(&self) -> Option<&SearchEntry> {
        self.entries.first().filter(|e| e.average_f1.is_some())
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.error.is_some()).count()
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from(
            "rank,index,strategy,batch_size,epochs,learning_rate,weight_decay,famo_alpha,famo_gamma,seed,average_f1,error\n",
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (rank, e) in self.entries.iter().enumerate() {
            let c = &e.config;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                rank + 1,
                e.index,
                c.strategy,
                c.batch_size,
                c.epochs,
                c.learning_rate,
                c.weight_decay,
                opt(c.famo_alpha),
                opt(c.famo_gamma),
                c.seed,
                opt(e.average_f1),
                e.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            );
        }
        out
    }
}

/// Trains and evaluates every configuration. Seeds and `lr_scale` in the
/// given configs are overwritten from `options`.
pub fn run_search(
    train: &FeaturizedRows,
    eval: &FeaturizedRows,
    configs: &[TrainConfig],
    weight_stats: Option<&ClassStats>,
    options: &SearchOptions,
) -> Result<SearchResult> {
    if train.is_empty() || eval.is_empty() {
        return Err(Error::EmptyDataset(
            "search needs non-empty train and eval splits",
        ));
    }
    let dims = train.dims();
    let run = |(index, base): (usize, &TrainConfig)| -> SearchEntry {
        let mut config = base.clone();
        config.seed = options.base_seed.wrapping_add(index as u64);
        config.lr_scale = options.lr_scale;
        let outcome = train_featurized(train, weight_stats, &config, dims)
            .and_then(|m| evaluate_featurized(&m.params, eval));
        match outcome {
            Ok(report) => SearchEntry {
                index,
                config,
                average_f1: Some(report.grand.f1),
                report: Some(report),
                error: None,
            },
            Err(e) => SearchEntry {
                index,
                config,
                average_f1: None,
                report: None,
                error: Some(e.to_string()),
            },
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let mut entries: Vec<SearchEntry> =
        pool.install(|| configs.par_iter().enumerate().map(run).collect());
    rank(&mut entries);
    Ok(SearchResult { entries })
}

/// Best average F1 first; ties keep their order, failed runs go last.
pub fn rank(entries: &mut [SearchEntry]) {
    entries.sort_by(|a, b| match (a.average_f1, b.average_f1) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.index.cmp(&b.index)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    });
}

/// Featurizes both splits and searches one strategy's grid.
pub fn search_rows(
    train_rows: &[LabeledComment],
    eval_rows: &[LabeledComment],
    grid: &Grid,
    strategy: Strategy,
    featurizer: &FeaturizerConfig,
    options: &SearchOptions,
) -> Result<SearchResult> {
    let train = FeaturizedRows::new(train_rows, featurizer)?;
    let eval = FeaturizedRows::new(eval_rows, featurizer)?;
    run_search(&train, &eval, &enumerate(grid, strategy), None, options)
}
