//! Span labeling: every span up to a maximum width is pooled into a fixed
//! vector with softmax attention over its tokens and assigned independent
//! sigmoid probabilities for each `(label, role)` pair.

mod model;
mod train;

use serde::{Deserialize, Serialize};

use crate::corpus::{Schema, Span};

pub use model::{SpanGradient, SpanModel, SpanPrediction};
pub use train::{
    predict, predict_all, train, train_with_log, SpanTrainConfig, DEFAULT_MAX_SPAN_WIDTH,
    PRETRAINED_ENCODER_LEARNING_RATE,
};

/// Probability clamp used by [`bce_loss`].
pub const PROB_CLAMP: f64 = 1e-7;

/// One entry of the flattened `(label, role)` label set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpanLabel {
    pub label: String,
    pub role: String,
}

/// All `(label, role)` pairs in schema order.
pub fn span_label_set(schema: &Schema) -> Vec<SpanLabel> {
    schema
        .labels
        .iter()
        .flat_map(|l| {
            l.roles.iter().map(move |r| SpanLabel {
                label: l.name.clone(),
                role: r.name.clone(),
            })
        })
        .collect()
}

/// All spans `[i, j)` with `1 <= j - i <= min(max_width, n)`, ordered by
/// `(start, end)`.
pub fn enumerate_spans(n: usize, max_width: usize) -> Vec<Span> {
    let mut out = Vec::new();
    for start in 0..n {
        for end in start + 1..=(start + max_width).min(n) {
            out.push(Span::new(start, end));
        }
    }
    out
}

/// Max-shifted softmax.
pub fn attention_weights(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Attention-pooled representation of `span` over contextualized
/// embeddings `contextual` (`n` rows of length `d`), with token scores
/// `c_k . attention`.
pub fn span_representation(contextual: &[Vec<f64>], span: Span, attention: &[f64]) -> Vec<f64> {
    let rows = &contextual[span.start..span.end];
    let scores: Vec<f64> = rows.iter().map(|c| dot(c, attention)).collect();
    let weights = attention_weights(&scores);
    let d = attention.len();
    let mut rep = vec![0.0; d];
    for (w, c) in weights.iter().zip(rows) {
        for (r, x) in rep.iter_mut().zip(c) {
            *r += w * x;
        }
    }
    rep
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Independent sigmoid probabilities; `head[t]` is the weight vector of label `t`.
pub fn span_label_probs(rep: &[f64], head: &[Vec<f64>], bias: &[f64]) -> Vec<f64> {
    head.iter()
        .zip(bias)
        .map(|(w, b)| sigmoid(dot(rep, w) + b))
        .collect()
}

/// Mean binary cross-entropy with probabilities clamped to
/// `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub fn bce_loss(predictions: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(predictions.len(), targets.len());
    if predictions.is_empty() {
        return 0.0;
    }
    let total: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            let q = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            -(y * q.ln() + (1.0 - y) * (1.0 - q).ln())
        })
        .sum();
    total / predictions.len() as f64
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
