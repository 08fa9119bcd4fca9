//! Adaptive per-batch loss weighting.
//!
//! Class weights are `C * softmax(xi)`. After every batch the per-class
//! log-loss improvement `delta_c = ln(prev_c) - ln(new_c)` is centred across
//! classes and the logits move against it:
//!
//! ```text
//! xi_c <- xi_c - alpha * (delta_c - mean(delta)) - alpha * gamma * xi_c
//! ```
//!
//! so classes whose loss falls faster than average lose weight and classes
//! that stall gain it. The first batch only records its losses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PROB_EPSILON;
use crate::weighting::{LossWeights, Strategy};

/// Step sizes searched for the adaptive strategy.
pub const ALPHA_GRID: [f64; 3] = [25e-2, 25e-3, 25e-4];
/// Logit decays searched for the adaptive strategy.
pub const GAMMA_GRID: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamoState {
    pub xi: Vec<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub prev_loss: Option<Vec<f64>>,
}

impl FamoState {
    pub fn new(num_classes: usize, alpha: f64, gamma: f64) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::InvalidConfig("need at least one class".into()));
        }
        if !(alpha.is_finite() && alpha >= 0.0 && gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "famo alpha and gamma must be finite and non-negative, got {alpha}, {gamma}"
            )));
        }
        Ok(FamoState {
            xi: vec![0.0; num_classes],
            alpha,
            gamma,
            prev_loss: None,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.xi.len()
    }

    /// `softmax(xi)`, summing to one.
    pub fn simplex(&self) -> Vec<f64> {
        softmax(&self.xi)
    }
}

pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `C * softmax(xi)`, so the uniform state reproduces equal weights.
pub fn famo_weights(state: &FamoState) -> LossWeights {
    let c = state.num_classes() as f64;
    LossWeights {
        strategy: Strategy::Famo,
        w: state.simplex().into_iter().map(|s| c * s).collect(),
    }
}

pub fn famo_update(state: &FamoState, new_loss: &[f64]) -> Result<FamoState> {
    let mut next = state.clone();
    famo_update_in_place(&mut next, new_loss)?;
    Ok(next)
}

pub fn famo_update_in_place(state: &mut FamoState, new_loss: &[f64]) -> Result<()> {
    if new_loss.len() != state.num_classes() {
        return Err(Error::LengthMismatch {
            what: "famo losses",
            expected: state.num_classes(),
            actual: new_loss.len(),
        });
    }
    let mut floored = Vec::with_capacity(new_loss.len());
    for &l in new_loss {
        if l.is_nan() {
            return Err(Error::Numerical("NaN class loss in famo update".into()));
        }
        if l < 0.0 || !l.is_finite() {
            return Err(Error::Numerical(format!(
                "invalid class loss {l} in famo update"
            )));
        }
        floored.push(l.max(PROB_EPSILON));
    }

    if let Some(prev) = &state.prev_loss {
        let delta: Vec<f64> = prev
            .iter()
            .zip(&floored)
            .map(|(p, n)| p.ln() - n.ln())
            .collect();
        let mean = delta.iter().sum::<f64>() / delta.len() as f64;
        let (alpha, gamma) = (state.alpha, state.gamma);
        for (xi, d) in state.xi.iter_mut().zip(&delta) {
            *xi = *xi - alpha * (d - mean) - alpha * gamma * *xi;
        }
    }
    state.prev_loss = Some(floored);
    Ok(())
}
