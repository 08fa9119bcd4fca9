//! JSON model checkpoints.
//!
//! A checkpoint stores the weight matrix sparsely (non-zero entries per class
//! row), the biases, the featurizer configuration needed to reproduce inputs
//! and the training configuration and loss weights it came from. Floats are
//! written in shortest round-trip form, so saving the same model twice gives
//! identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::error::{Error, Result};
use crate::featurizer::FeaturizerConfig;
use crate::model::ModelParams;
use crate::trainer::TrainConfig;
use crate::weighting::LossWeights;

pub const FORMAT: &str = "commentweight-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub class: usize,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub language: Language,
    pub class_names: Vec<String>,
    pub featurizer: FeaturizerConfig,
    pub train_config: TrainConfig,
    pub loss_weights: LossWeights,
    pub dims: usize,
    pub num_classes: usize,
    pub bias: Vec<f64>,
    pub rows: Vec<SparseRow>,
    /// Run manifest of the command that produced the checkpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

impl Checkpoint {
    pub fn new(
        language: Language,
        params: &ModelParams,
        featurizer: &FeaturizerConfig,
        train_config: &TrainConfig,
        loss_weights: &LossWeights,
    ) -> Self {
        let rows = (0..params.num_classes)
            .map(|c| {
                let (indices, values) = params
                    .row(c)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (i as u32, *v))
                    .unzip();
                SparseRow {
                    class: c,
                    indices,
                    values,
                }
            })
            .collect();
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            language,
            class_names: language.catalog().class_names,
            featurizer: featurizer.clone(),
            train_config: train_config.clone(),
            loss_weights: loss_weights.clone(),
            dims: params.dims,
            num_classes: params.num_classes,
            bias: params.bias.clone(),
            rows,
            manifest: None,
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.bias.len() != self.num_classes {
            return Err(Error::LengthMismatch {
                what: "checkpoint bias",
                expected: self.num_classes,
                actual: self.bias.len(),
            });
        }
        let mut p = ModelParams::zeros(self.num_classes, self.dims);
        p.bias = self.bias.clone();
        for row in &self.rows {
            if row.class >= self.num_classes || row.indices.len() != row.values.len() {
                return Err(Error::InvalidConfig(format!(
                    "corrupt checkpoint row for class {}",
                    row.class
                )));
            }
            for (&i, &v) in row.indices.iter().zip(&row.values) {
                if i as usize >= self.dims {
                    return Err(Error::DimensionMismatch {
                        expected: self.dims,
                        actual: i as usize + 1,
                    });
                }
                p.set_weight(row.class, i as usize, v);
            }
        }
        if !p.is_finite() {
            return Err(Error::Numerical(
                "checkpoint holds non-finite values".into(),
            ));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}
