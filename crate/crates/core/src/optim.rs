//! Adam with decoupled weight decay.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 1e-2,
        }
    }
}

/// First and second moment estimates for one flat parameter group.
#[derive(Debug, Clone, Default)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    /// Extends the group with zero moments (new parameters start at zero).
    pub fn grow(&mut self, len: usize) {
        if len > self.m.len() {
            self.m.resize(len, 0.0);
            self.v.resize(len, 0.0);
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// One update. `step` is the 1-based global step count used for bias
    /// correction; `grads` must match `params` in length.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64, step: u64, cfg: &AdamConfig) {
        assert_eq!(params.len(), grads.len());
        self.grow(params.len());
        let bc1 = 1.0 - cfg.beta1.powf(step as f64);
        let bc2 = 1.0 - cfg.beta2.powf(step as f64);
        let decay = 1.0 - lr * cfg.weight_decay;
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *p *= decay;
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}
