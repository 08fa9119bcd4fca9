//! Mini-batch SGD with decoupled weight decay.
//!
//! Each step applies `theta <- theta - lr * grad - lr * wd * theta` to the
//! weight matrix and `b <- b - lr * grad_b` to the bias. The decay is kept as
//! a lazy global scale on the weight matrix so a step only touches the
//! features present in the batch.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{compute_class_stats, ClassCatalog, ClassStats, LabeledComment};
use crate::error::{Error, Result};
use crate::famo::{famo_update_in_place, famo_weights, FamoState};
use crate::featurizer::{featurize, FeaturizerConfig, SparseVector};
use crate::metrics::{ConfusionCounts, EvalReport};
use crate::model::{
    batch_class_losses, logit_gradients_from_probs, predict, Example, ModelParams, Scorer,
    DEFAULT_THRESHOLD,
};
use crate::weighting::{static_weights, LossWeights, Strategy};

/// Below this the lazy scale is folded back into the stored weights.
const MIN_SCALE: f64 = 1e-100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub famo_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub famo_gamma: Option<f64>,
    pub seed: u64,
    /// Multiplier on `learning_rate`; the effective step is their product.
    #[serde(default = "one")]
    pub lr_scale: f64,
    /// Keep per-batch losses and weights in the history. Always on for FAMO.
    #[serde(default)]
    pub record_batches: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 4,
            epochs: 10,
            learning_rate: 3e-5,
            weight_decay: 0.0,
            strategy: Strategy::Ew,
            famo_alpha: None,
            famo_gamma: None,
            seed: 0,
            lr_scale: 1.0,
            record_batches: false,
        }
    }
}

impl TrainConfig {
    pub fn effective_lr(&self) -> f64 {
        self.learning_rate * self.lr_scale
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("weight_decay", self.weight_decay),
            ("lr_scale", self.lr_scale),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if self.effective_lr() * self.weight_decay >= 1.0 {
            return bad(format!(
                "lr * weight_decay = {} would flip the sign of the weights",
                self.effective_lr() * self.weight_decay
            ));
        }
        if self.strategy == Strategy::Famo
            && (self.famo_alpha.is_none() || self.famo_gamma.is_none())
        {
            return bad("FAMO strategy needs famo_alpha and famo_gamma".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub epoch: usize,
    pub batch: usize,
    pub per_class_loss: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub batches: Vec<BatchRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub history: TrainHistory,
    /// Static weights used, or the final adaptive weights for FAMO.
    pub loss_weights: LossWeights,
}

/// Rows turned into feature vectors once, so repeated runs skip hashing.
#[derive(Debug, Clone)]
pub struct FeaturizedRows {
    pub catalog: ClassCatalog,
    pub features: Vec<SparseVector>,
    pub labels: Vec<Vec<bool>>,
}

impl FeaturizedRows {
    pub fn new(rows: &[LabeledComment], featurizer: &FeaturizerConfig) -> Result<Self> {
        featurizer.validate()?;
        let first = rows
            .first()
            .ok_or(Error::EmptyDataset("no rows to featurize"))?;
        let language = first.language;
        if let Some(r) = rows.iter().find(|r| r.language != language) {
            return Err(Error::MixedLanguages(
                language.to_string(),
                r.language.to_string(),
            ));
        }
        Ok(FeaturizedRows {
            catalog: language.catalog(),
            features: rows
                .iter()
                .map(|r| featurize(&r.combo, featurizer))
                .collect(),
            labels: rows.iter().map(|r| r.labels.clone()).collect(),
        })
    }

    /// Featurizes free texts under an arbitrary catalog (used for synthetic
    /// label sets that do not match a language's classes).
    pub fn from_texts(
        catalog: ClassCatalog,
        texts: &[String],
        labels: Vec<Vec<bool>>,
        featurizer: &FeaturizerConfig,
    ) -> Result<Self> {
        featurizer.validate()?;
        if texts.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "texts and labels",
                expected: texts.len(),
                actual: labels.len(),
            });
        }
        if let Some(y) = labels.iter().find(|y| y.len() != catalog.len()) {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: catalog.len(),
                actual: y.len(),
            });
        }
        Ok(FeaturizedRows {
            catalog,
            features: texts.iter().map(|t| featurize(t, featurizer)).collect(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.first().map(|f| f.dims()).unwrap_or(0)
    }

    pub fn num_classes(&self) -> usize {
        self.catalog.len()
    }

    pub fn stats(&self) -> ClassStats {
        let mut positives = vec![0; self.num_classes()];
        for y in &self.labels {
            for (p, &b) in positives.iter_mut().zip(y) {
                *p += b as usize;
            }
        }
        ClassStats {
            catalog: self.catalog.clone(),
            total: self.len(),
            positives,
        }
    }
}

/// Weight matrix stored as `scale * values`.
#[derive(Debug, Clone)]
struct ScaledParams {
    num_classes: usize,
    dims: usize,
    scale: f64,
    values: Vec<f64>,
    bias: Vec<f64>,
}

impl ScaledParams {
    fn from_params(p: &ModelParams) -> Self {
        ScaledParams {
            num_classes: p.num_classes,
            dims: p.dims,
            scale: 1.0,
            values: p.weights.clone(),
            bias: p.bias.clone(),
        }
    }

    fn materialize(&self) -> ModelParams {
        ModelParams {
            num_classes: self.num_classes,
            dims: self.dims,
            weights: if self.scale == 1.0 {
                self.values.clone()
            } else {
                self.values.iter().map(|v| v * self.scale).collect()
            },
            bias: self.bias.clone(),
        }
    }

    fn fold_scale(&mut self) {
        let s = self.scale;
        self.values.iter_mut().for_each(|v| *v *= s);
        self.scale = 1.0;
    }
}

impl Scorer for ScaledParams {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn dims(&self) -> usize {
        self.dims
    }

    fn logit(&self, class: usize, x: &SparseVector) -> f64 {
        let row = &self.values[class * self.dims..(class + 1) * self.dims];
        self.scale * x.dot(row) + self.bias[class]
    }
}

/// Outcome of one optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub per_class_loss: Vec<f64>,
    pub weights: Vec<f64>,
    pub total_loss: f64,
}

/// Stateful single-run optimizer.
#[derive(Debug, Clone)]
pub struct Trainer {
    params: ScaledParams,
    lr: f64,
    weight_decay: f64,
    static_weights: Option<LossWeights>,
    famo: Option<FamoState>,
}

impl Trainer {
    /// `static_weights` is required for EW, ICF and RBF and ignored for FAMO.
    pub fn new(
        params: ModelParams,
        config: &TrainConfig,
        static_weights: Option<LossWeights>,
    ) -> Result<Self> {
        config.validate()?;
        let c = params.num_classes;
        let (static_weights, famo) = if config.strategy == Strategy::Famo {
            let alpha = config.famo_alpha.unwrap_or_default();
            let gamma = config.famo_gamma.unwrap_or_default();
            (None, Some(FamoState::new(c, alpha, gamma)?))
        } else {
            let w = static_weights.ok_or_else(|| {
                Error::InvalidConfig(format!("{} needs static weights", config.strategy))
            })?;
            if w.len() != c {
                return Err(Error::LengthMismatch {
                    what: "loss weights",
                    expected: c,
                    actual: w.len(),
                });
            }
            (Some(w), None)
        };
        Ok(Trainer {
            params: ScaledParams::from_params(&params),
            lr: config.effective_lr(),
            weight_decay: config.weight_decay,
            static_weights,
            famo,
        })
    }

    pub fn current_weights(&self) -> LossWeights {
        match (&self.famo, &self.static_weights) {
            (Some(state), _) => famo_weights(state),
            (None, Some(w)) => w.clone(),
            (None, None) => unreachable!("trainer always holds a weighting"),
        }
    }

    pub fn famo_state(&self) -> Option<&FamoState> {
        self.famo.as_ref()
    }

    pub fn params(&self) -> ModelParams {
        self.params.materialize()
    }

    pub fn step(&mut self, batch: &[Example<'_>]) -> Result<StepOutcome> {
        let c = self.params.num_classes;
        let probs = batch
            .iter()
            .map(|(x, _)| self.params.probabilities(x))
            .collect::<Result<Vec<_>>>()?;
        let ys: Vec<&[bool]> = batch.iter().map(|(_, y)| *y).collect();
        let per_class = batch_class_losses(&probs, &ys, c)?;
        let weights = self.current_weights();
        let total: f64 = per_class.iter().zip(&weights.w).map(|(l, w)| w * l).sum();
        if !total.is_finite() {
            return Err(Error::Numerical(format!("batch loss is {total}")));
        }
        let dlogits = logit_gradients_from_probs(&probs, &ys, c, Some(&weights.w))?;

        // same accumulation order as the dense gradient
        let dims = self.params.dims;
        let mut grad: HashMap<usize, f64> = HashMap::new();
        let mut db = vec![0.0; c];
        for ((x, _), g) in batch.iter().zip(&dlogits) {
            for (k, &gk) in g.iter().enumerate() {
                db[k] += gk;
                for &(i, v) in x.entries() {
                    *grad.entry(k * dims + i as usize).or_insert(0.0) += gk * v;
                }
            }
        }

        let p = &mut self.params;
        let decay = self.lr * self.weight_decay;
        if decay > 0.0 {
            p.scale *= 1.0 - decay;
            if p.scale < MIN_SCALE {
                p.fold_scale();
            }
        }
        for (j, g) in grad {
            p.values[j] -= self.lr * g / p.scale;
        }
        for (b, g) in p.bias.iter_mut().zip(&db) {
            *b -= self.lr * g;
        }

        if let Some(state) = &mut self.famo {
            famo_update_in_place(state, &per_class)?;
        }
        Ok(StepOutcome {
            per_class_loss: per_class,
            weights: weights.w,
            total_loss: total,
        })
    }
}

pub fn train(
    rows: &[LabeledComment],
    config: &TrainConfig,
    featurizer: &FeaturizerConfig,
) -> Result<TrainedModel> {
    let data = FeaturizedRows::new(rows, featurizer)?;
    train_featurized(&data, None, config, featurizer.dims)
}

/// Like [`train`], but static weights come from `weight_stats` when given
/// (e.g. statistics of the whole dataset) instead of the training rows.
pub fn train_with_stats(
    rows: &[LabeledComment],
    weight_stats: &ClassStats,
    config: &TrainConfig,
    featurizer: &FeaturizerConfig,
) -> Result<TrainedModel> {
    let data = FeaturizedRows::new(rows, featurizer)?;
    train_featurized(&data, Some(weight_stats), config, featurizer.dims)
}

pub fn train_featurized(
    data: &FeaturizedRows,
    weight_stats: Option<&ClassStats>,
    config: &TrainConfig,
    dims: usize,
) -> Result<TrainedModel> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset("empty training set"));
    }
    if data.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims,
            actual: data.dims(),
        });
    }
    let c = data.num_classes();
    let static_w = if config.strategy.is_static() {
        let own;
        let stats = match weight_stats {
            Some(s) => s,
            None => {
                own = data.stats();
                &own
            }
        };
        Some(static_weights(config.strategy, stats)?)
    } else {
        None
    };

    let mut trainer = Trainer::new(ModelParams::zeros(c, dims), config, static_w)?;
    let mut history = TrainHistory::default();
    let record = config.record_batches || config.strategy == Strategy::Famo;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<Example<'_>> = chunk
                .iter()
                .map(|&i| (&data.features[i], data.labels[i].as_slice()))
                .collect();
            let out = trainer.step(&batch)?;
            sum += out.total_loss;
            batches += 1;
            if record {
                history.batches.push(BatchRecord {
                    epoch,
                    batch: b,
                    per_class_loss: out.per_class_loss,
                    weights: out.weights,
                });
            }
        }
        history.epochs.push(EpochRecord {
            epoch,
            mean_loss: sum / batches as f64,
        });
    }

    let params = trainer.params();
    if !params.is_finite() {
        return Err(Error::Numerical("trained parameters are not finite".into()));
    }
    Ok(TrainedModel {
        params,
        history,
        loss_weights: trainer.current_weights(),
    })
}

pub fn evaluate(
    params: &ModelParams,
    rows: &[LabeledComment],
    featurizer: &FeaturizerConfig,
) -> Result<EvalReport> {
    let data = FeaturizedRows::new(rows, featurizer)?;
    evaluate_featurized(params, &data)
}

pub fn evaluate_featurized(params: &ModelParams, data: &FeaturizedRows) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("no rows to evaluate"));
    }
    if params.num_classes != data.num_classes() {
        return Err(Error::CatalogMismatch(format!(
            "model has {} classes, {} expects {}",
            params.num_classes,
            data.catalog.language,
            data.num_classes()
        )));
    }
    let mut counts = ConfusionCounts::new(data.num_classes());
    for (x, y) in data.features.iter().zip(&data.labels) {
        let p = params.forward(x)?;
        if p.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("NaN probability during evaluation".into()));
        }
        counts.record(&predict(&p, DEFAULT_THRESHOLD), y)?;
    }
    EvalReport::from_counts(&data.catalog, &counts)
}

/// Class statistics of `rows`, for weighting with a non-default source.
pub fn weight_stats(rows: &[LabeledComment]) -> Result<ClassStats> {
    compute_class_stats(rows)
}
