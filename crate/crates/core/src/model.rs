//! Sparse linear multi-label classifier with a weighted per-class BCE loss.
//!
//! One logit per class, `W_c . x + b_c`, squashed by a sigmoid. The loss of a
//! batch is `sum_c w_c * mean_batch(BCE_c)`; gradients are analytic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurizer::SparseVector;
use crate::weighting::LossWeights;

/// Floor applied to probabilities (and to `1 - p`) before taking logs.
pub const PROB_EPSILON: f64 = 1e-12;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// One training or evaluation example: features and label bits.
pub type Example<'a> = (&'a SparseVector, &'a [bool]);

/// Anything that can produce a per-class logit for a sparse input.
pub trait Scorer {
    fn num_classes(&self) -> usize;
    fn dims(&self) -> usize;
    fn logit(&self, class: usize, x: &SparseVector) -> f64;

    fn probabilities(&self, x: &SparseVector) -> Result<Vec<f64>> {
        if x.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: x.dims(),
            });
        }
        Ok((0..self.num_classes())
            .map(|c| sigmoid(self.logit(c, x)))
            .collect())
    }
}

/// Dense `C x D` weight matrix (row-major) plus one bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub num_classes: usize,
    pub dims: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(num_classes: usize, dims: usize) -> Self {
        ModelParams {
            num_classes,
            dims,
            weights: vec![0.0; num_classes * dims],
            bias: vec![0.0; num_classes],
        }
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.weights[class * self.dims..(class + 1) * self.dims]
    }

    pub fn weight(&self, class: usize, index: usize) -> f64 {
        self.weights[class * self.dims + index]
    }

    pub fn set_weight(&mut self, class: usize, index: usize, value: f64) {
        self.weights[class * self.dims + index] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    pub fn forward(&self, x: &SparseVector) -> Result<Vec<f64>> {
        self.probabilities(x)
    }

    /// `theta <- theta - lr * grad - lr * wd * theta`; the bias is not decayed.
    pub fn apply_update(&mut self, grad: &Gradient, lr: f64, weight_decay: f64) -> Result<()> {
        if grad.dw.len() != self.weights.len() || grad.db.len() != self.bias.len() {
            return Err(Error::LengthMismatch {
                what: "gradient",
                expected: self.weights.len(),
                actual: grad.dw.len(),
            });
        }
        let decay = lr * weight_decay;
        for (w, g) in self.weights.iter_mut().zip(&grad.dw) {
            *w = *w - lr * g - decay * *w;
        }
        for (b, g) in self.bias.iter_mut().zip(&grad.db) {
            *b -= lr * g;
        }
        Ok(())
    }
}

impl Scorer for ModelParams {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn dims(&self) -> usize {
        self.dims
    }

    fn logit(&self, class: usize, x: &SparseVector) -> f64 {
        x.dot(self.row(class)) + self.bias[class]
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Mean BCE of each class over the batch, before weighting.
    pub per_class: Vec<f64>,
    /// `sum_c w_c * per_class[c]`.
    pub total: f64,
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON)
}

/// Unweighted binary cross-entropy of one probability.
pub fn bce(p: f64, y: bool) -> f64 {
    let p = clamp_prob(p);
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

pub fn weighted_bce(probs: &[f64], y: &[bool], weights: &LossWeights) -> Result<LossBreakdown> {
    batch_weighted_bce(&[probs.to_vec()], &[y], weights)
}

/// Per-class BCE averaged over the batch, then combined with `weights`.
pub fn batch_weighted_bce<P: AsRef<[f64]>, Y: AsRef<[bool]>>(
    probs: &[P],
    ys: &[Y],
    weights: &LossWeights,
) -> Result<LossBreakdown> {
    let per_class = batch_class_losses(probs, ys, weights.len())?;
    let total = per_class.iter().zip(&weights.w).map(|(l, w)| w * l).sum();
    Ok(LossBreakdown { per_class, total })
}

pub(crate) fn batch_class_losses<P: AsRef<[f64]>, Y: AsRef<[bool]>>(
    probs: &[P],
    ys: &[Y],
    num_classes: usize,
) -> Result<Vec<f64>> {
    if probs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            what: "batch labels",
            expected: probs.len(),
            actual: ys.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    let mut per_class = vec![0.0; num_classes];
    for (p, y) in probs.iter().zip(ys) {
        let (p, y) = (p.as_ref(), y.as_ref());
        for (what, len) in [("probabilities", p.len()), ("labels", y.len())] {
            if len != num_classes {
                return Err(Error::LengthMismatch {
                    what,
                    expected: num_classes,
                    actual: len,
                });
            }
        }
        for c in 0..num_classes {
            if p[c].is_nan() {
                return Err(Error::Numerical(format!("NaN probability for class {c}")));
            }
            per_class[c] += bce(p[c], y[c]);
        }
    }
    let n = probs.len() as f64;
    per_class.iter_mut().for_each(|l| *l /= n);
    Ok(per_class)
}

/// Dense gradient of the batch-mean weighted BCE.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub dw: Vec<f64>,
    pub db: Vec<f64>,
}

/// Logit gradients `w_c (p_c - y_c) / n`, one vector per example. With
/// `weights = None` the factor `w_c` is left out entirely.
pub(crate) fn logit_gradients<S: Scorer + ?Sized>(
    params: &S,
    batch: &[Example<'_>],
    weights: Option<&[f64]>,
) -> Result<Vec<Vec<f64>>> {
    let probs = batch
        .iter()
        .map(|(x, _)| params.probabilities(x))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<&[bool]> = batch.iter().map(|(_, y)| *y).collect();
    logit_gradients_from_probs(&probs, &ys, params.num_classes(), weights)
}

pub(crate) fn logit_gradients_from_probs(
    probs: &[Vec<f64>],
    ys: &[&[bool]],
    num_classes: usize,
    weights: Option<&[f64]>,
) -> Result<Vec<Vec<f64>>> {
    if probs.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    if let Some(w) = weights {
        if w.len() != num_classes {
            return Err(Error::LengthMismatch {
                what: "loss weights",
                expected: num_classes,
                actual: w.len(),
            });
        }
    }
    let n = probs.len() as f64;
    probs
        .iter()
        .zip(ys)
        .map(|(p, y)| {
            if y.len() != num_classes {
                return Err(Error::LengthMismatch {
                    what: "labels",
                    expected: num_classes,
                    actual: y.len(),
                });
            }
            Ok((0..num_classes)
                .map(|k| {
                    let r = p[k] - if y[k] { 1.0 } else { 0.0 };
                    match weights {
                        Some(w) => w[k] * r / n,
                        None => r / n,
                    }
                })
                .collect())
        })
        .collect()
}

fn scatter(params: &ModelParams, batch: &[Example<'_>], dlogits: &[Vec<f64>]) -> Gradient {
    let mut dw = vec![0.0; params.weights.len()];
    let mut db = vec![0.0; params.num_classes];
    for ((x, _), g) in batch.iter().zip(dlogits) {
        for (k, &gk) in g.iter().enumerate() {
            db[k] += gk;
            let row = &mut dw[k * params.dims..(k + 1) * params.dims];
            for &(i, v) in x.entries() {
                row[i as usize] += gk * v;
            }
        }
    }
    Gradient { dw, db }
}

pub fn gradient(
    params: &ModelParams,
    batch: &[Example<'_>],
    weights: &LossWeights,
) -> Result<Gradient> {
    let g = logit_gradients(params, batch, Some(&weights.w))?;
    Ok(scatter(params, batch, &g))
}

/// Gradient of the plain (unit-weight) sum of per-class BCEs.
pub fn gradient_unweighted(params: &ModelParams, batch: &[Example<'_>]) -> Result<Gradient> {
    let g = logit_gradients(params, batch, None)?;
    Ok(scatter(params, batch, &g))
}

/// Bit `c` is set iff `p_c >= threshold`.
pub fn predict(probs: &[f64], threshold: f64) -> Vec<bool> {
    probs.iter().map(|&p| p >= threshold).collect()
}
