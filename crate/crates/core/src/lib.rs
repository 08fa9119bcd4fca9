//! Multi-label comment classification under class imbalance.
//!
//! A hashed bag-of-words linear model trained with per-class weighted binary
//! cross-entropy. Four weightings are available: equal weights, inverse class
//! frequency, ranking-based frequency and an adaptive per-batch scheme. The
//! crate also carries the grid search harness and the per-class
//! precision/recall/F1 evaluation.

pub mod checkpoint;
pub mod corpus;
pub mod error;
pub mod famo;
pub mod featurizer;
pub mod metrics;
pub mod model;
pub mod search;
pub mod synthetic;
pub mod trainer;
pub mod weighting;

pub use checkpoint::Checkpoint;
pub use corpus::{
    compute_class_stats, load_dataset, ClassCatalog, ClassStats, LabeledComment, Language, Split,
};
pub use error::{Error, Result};
pub use famo::{famo_update, famo_weights, FamoState};
pub use featurizer::{featurize, tokenize, FeaturizerConfig, SparseVector};
pub use metrics::{
    delta, prf, submission_score, ClassCounts, ConfusionCounts, EvalReport, ScoreFormula,
};
pub use model::{gradient, predict, weighted_bce, LossBreakdown, ModelParams};
pub use search::{enumerate, run_search, Grid, SearchOptions, SearchResult};
pub use trainer::{evaluate, train, FeaturizedRows, TrainConfig, TrainHistory, TrainedModel};
pub use weighting::{ew_weights, icf_weights, rbf_weights, LossWeights, Strategy};
