use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Flat parameter vector plus Adam moment buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    values: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl ParameterSet {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        Self { values, m: vec![0.0; n], v: vec![0.0; n], step: 0 }
    }

    pub(crate) fn from_parts(values: Vec<f64>, m: Vec<f64>, v: Vec<f64>, step: u64) -> Result<Self> {
        if m.len() != values.len() || v.len() != values.len() {
            return Err(Error::Shape("moment buffers must match parameter count".into()));
        }
        Ok(Self { values, m, v, step })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Euclidean distance between the parameter values of two sets.
    pub fn distance(&self, other: &ParameterSet) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { alpha: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }
}

/// One bias-corrected Adam descent step along `grads`.
pub fn adam_step(params: &mut ParameterSet, grads: &[f64], cfg: &AdamConfig) -> Result<()> {
    if grads.len() != params.values.len() {
        return Err(Error::Shape(format!("{} gradients for {} parameters", grads.len(), params.values.len())));
    }
    ensure_finite(grads, "gradient")?;
    params.step += 1;
    let t = params.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for (((x, m), v), &g) in params.values.iter_mut().zip(&mut params.m).zip(&mut params.v).zip(grads) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *x -= cfg.alpha * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

/// `target <- tau * source + (1 - tau) * target`, values only.
pub fn soft_update(target: &mut ParameterSet, source: &ParameterSet, tau: f64) -> Result<()> {
    if target.values.len() != source.values.len() {
        return Err(Error::Shape(format!(
            "soft update between {} and {} parameters",
            target.values.len(),
            source.values.len()
        )));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau must lie in [0, 1], got {tau}")));
    }
    for (t, &s) in target.values.iter_mut().zip(&source.values) {
        *t = tau * s + (1.0 - tau) * *t;
    }
    Ok(())
}
