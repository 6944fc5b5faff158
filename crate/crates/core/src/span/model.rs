use serde::{Deserialize, Serialize};

use super::train::SpanTrainConfig;
use super::{attention_weights, dot, sigmoid, SpanLabel, PROB_CLAMP};
use crate::corpus::Span;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanPrediction {
    #[serde(flatten)]
    pub span: Span,
    pub label: String,
    pub role: String,
    #[serde(rename = "prob")]
    pub probability: f64,
}

/// Span labeler parameters.
///
/// Token embeddings are a `[(vocab + 1) x dim]` table whose row 0 is the
/// unknown-token row; row `i + 1` belongs to `vocabulary[i]` (kept sorted).
/// `head` holds one `dim`-vector per label, i.e. the columns of the
/// `[dim x labels]` output matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpanModel {
    pub schema_fingerprint: String,
    pub labels: Vec<SpanLabel>,
    pub vocabulary: Vec<String>,
    pub dim: usize,
    pub embeddings: Vec<f64>,
    pub attention: Vec<f64>,
    pub head: Vec<f64>,
    pub bias: Vec<f64>,
    pub max_span_width: usize,
    pub context_window: usize,
    pub threshold: f64,
    pub config: SpanTrainConfig,
}

/// Gradient of the mean BCE loss of one document, shaped like [`SpanModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpanGradient {
    pub embeddings: Vec<f64>,
    pub attention: Vec<f64>,
    pub head: Vec<f64>,
    pub bias: Vec<f64>,
}

impl SpanGradient {
    pub fn zeros_like(model: &SpanModel) -> Self {
        SpanGradient {
            embeddings: vec![0.0; model.embeddings.len()],
            attention: vec![0.0; model.attention.len()],
            head: vec![0.0; model.head.len()],
            bias: vec![0.0; model.bias.len()],
        }
    }

    pub fn add_scaled(&mut self, other: &SpanGradient, scale: f64) {
        let pairs = [
            (&mut self.embeddings, &other.embeddings),
            (&mut self.attention, &other.attention),
            (&mut self.head, &other.head),
            (&mut self.bias, &other.bias),
        ];
        for (mine, theirs) in pairs {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += scale * b;
            }
        }
    }
}

impl SpanModel {
    /// A model with every weight at zero.
    pub fn zeros(
        labels: Vec<SpanLabel>,
        vocabulary: Vec<String>,
        dim: usize,
        schema_fingerprint: String,
        config: SpanTrainConfig,
    ) -> Self {
        let mut vocabulary = vocabulary;
        vocabulary.sort();
        vocabulary.dedup();
        let t = labels.len();
        SpanModel {
            schema_fingerprint,
            embeddings: vec![0.0; (vocabulary.len() + 1) * dim],
            attention: vec![0.0; dim],
            head: vec![0.0; t * dim],
            bias: vec![0.0; t],
            labels,
            vocabulary,
            dim,
            max_span_width: config.max_span_width,
            context_window: config.context_window,
            threshold: config.threshold,
            config,
        }
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn token_id(&self, token: &str) -> usize {
        self.vocabulary
            .binary_search_by(|v| v.as_str().cmp(token))
            .map_or(0, |i| i + 1)
    }

    pub fn token_ids(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.token_id(t)).collect()
    }

    fn window(&self, k: usize, n: usize) -> (usize, usize) {
        (k.saturating_sub(self.context_window), (k + self.context_window).min(n - 1))
    }

    /// Contextualized embeddings: each token's embedding plus the mean
    /// embedding of its `context_window` neighbourhood (itself included).
    pub fn contextualize(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        let n = ids.len();
        let d = self.dim;
        let emb = |id: usize| &self.embeddings[id * d..(id + 1) * d];
        // prefix sums over the token sequence
        let mut prefix = vec![vec![0.0; d]; n + 1];
        for k in 0..n {
            let (done, rest) = prefix.split_at_mut(k + 1);
            for ((p, q), x) in rest[0].iter_mut().zip(&done[k]).zip(emb(ids[k])) {
                *p = q + x;
            }
        }
        (0..n)
            .map(|k| {
                let (lo, hi) = self.window(k, n);
                let count = (hi - lo + 1) as f64;
                emb(ids[k])
                    .iter()
                    .enumerate()
                    .map(|(j, x)| x + (prefix[hi + 1][j] - prefix[lo][j]) / count)
                    .collect()
            })
            .collect()
    }

    fn head_row(&self, t: usize) -> &[f64] {
        &self.head[t * self.dim..(t + 1) * self.dim]
    }

    /// Label probabilities for each span, in `spans` order.
    pub fn span_probabilities(&self, ids: &[usize], spans: &[Span]) -> Vec<Vec<f64>> {
        let c = self.contextualize(ids);
        let scores: Vec<f64> = c.iter().map(|ck| dot(ck, &self.attention)).collect();
        spans
            .iter()
            .map(|s| {
                let rep = pool(&c, &scores, *s, self.dim).1;
                (0..self.num_labels())
                    .map(|t| sigmoid(dot(&rep, self.head_row(t)) + self.bias[t]))
                    .collect()
            })
            .collect()
    }

    /// Mean BCE over `(span, label)` pairs of `spans` and its gradient.
    /// `targets[s][t]` is 1 when span `s` carries label `t`.
    pub fn loss_and_gradient(
        &self,
        ids: &[usize],
        spans: &[Span],
        targets: &[Vec<f64>],
    ) -> (f64, SpanGradient) {
        let n = ids.len();
        let d = self.dim;
        let nl = self.num_labels();
        let mut grad = SpanGradient::zeros_like(self);
        let entries = spans.len() * nl;
        if entries == 0 {
            return (0.0, grad);
        }
        let inv = 1.0 / entries as f64;
        let c = self.contextualize(ids);
        let scores: Vec<f64> = c.iter().map(|ck| dot(ck, &self.attention)).collect();
        let mut dc = vec![vec![0.0; d]; n];
        let mut loss = 0.0;
        let mut drep = vec![0.0; d];

        for (s, span) in spans.iter().enumerate() {
            let (weights, rep) = pool(&c, &scores, *span, d);
            drep.iter_mut().for_each(|x| *x = 0.0);
            for t in 0..nl {
                let w = self.head_row(t);
                let p = sigmoid(dot(&rep, w) + self.bias[t]);
                let y = targets[s][t];
                let q = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                loss -= y * q.ln() + (1.0 - y) * (1.0 - q).ln();
                // the clamp has zero derivative outside its range
                let g = if q == p { (p - y) * inv } else { 0.0 };
                if g == 0.0 {
                    continue;
                }
                grad.bias[t] += g;
                let gh = &mut grad.head[t * d..(t + 1) * d];
                for j in 0..d {
                    gh[j] += g * rep[j];
                    drep[j] += g * w[j];
                }
            }
            // rep = sum_k w_k c_k with w = softmax(a), a_k = c_k . M
            let rows = span.start..span.end;
            let dw: Vec<f64> = rows.clone().map(|k| dot(&drep, &c[k])).collect();
            let mean: f64 = weights.iter().zip(&dw).map(|(w, g)| w * g).sum();
            for (i, k) in rows.enumerate() {
                let da = weights[i] * (dw[i] - mean);
                for j in 0..d {
                    dc[k][j] += weights[i] * drep[j] + da * self.attention[j];
                    grad.attention[j] += da * c[k][j];
                }
            }
        }

        // c_k = e_k + mean(e_lo..=e_hi)
        for k in 0..n {
            let (lo, hi) = self.window(k, n);
            let share = 1.0 / (hi - lo + 1) as f64;
            add_row(&mut grad.embeddings, ids[k], d, &dc[k], 1.0);
            for m in lo..=hi {
                add_row(&mut grad.embeddings, ids[m], d, &dc[k], share);
            }
        }
        (loss * inv, grad)
    }

    pub fn parameters_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.embeddings, &mut self.attention, &mut self.head, &mut self.bias]
    }
}

fn add_row(table: &mut [f64], id: usize, d: usize, values: &[f64], scale: f64) {
    for (a, v) in table[id * d..(id + 1) * d].iter_mut().zip(values) {
        *a += scale * v;
    }
}

fn pool(c: &[Vec<f64>], scores: &[f64], span: Span, d: usize) -> (Vec<f64>, Vec<f64>) {
    let weights = attention_weights(&scores[span.start..span.end]);
    let mut rep = vec![0.0; d];
    for (w, ck) in weights.iter().zip(&c[span.start..span.end]) {
        for (r, x) in rep.iter_mut().zip(ck) {
            *r += w * x;
        }
    }
    (weights, rep)
}
