use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{SpanGradient, SpanModel, SpanPrediction};
use super::{enumerate_spans, span_label_set};
use crate::corpus::{Document, Schema, Span};
use crate::crf::{DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE};
use crate::error::{Error, Result};
use crate::optim::{AdamConfig, AdamState};

pub const DEFAULT_MAX_SPAN_WIDTH: usize = 8;
/// Embedding learning rate used when fine-tuning a pretrained encoder.
pub const PRETRAINED_ENCODER_LEARNING_RATE: f64 = 5e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SpanTrainConfig {
    pub embedding_dim: usize,
    /// Learning rate of the token embedding table.
    pub embedding_learning_rate: f64,
    /// Learning rate of the attention vector and the output head.
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub max_span_width: usize,
    pub context_window: usize,
    pub threshold: f64,
    /// Fraction of spans without any gold label kept in each document's loss.
    pub negative_sample_rate: f64,
    pub init_scale: f64,
}

impl Default for SpanTrainConfig {
    fn default() -> Self {
        SpanTrainConfig {
            embedding_dim: 32,
            embedding_learning_rate: DEFAULT_LEARNING_RATE,
            learning_rate: DEFAULT_LEARNING_RATE,
            weight_decay: AdamConfig::default().weight_decay,
            batch_size: DEFAULT_BATCH_SIZE,
            epochs: 20,
            seed: 0,
            max_span_width: DEFAULT_MAX_SPAN_WIDTH,
            context_window: 2,
            threshold: 0.5,
            negative_sample_rate: 1.0,
            init_scale: 0.1,
        }
    }
}

impl SpanTrainConfig {
    /// Embeddings trained at the small fine-tuning rate, everything else unchanged.
    pub fn with_pretrained_encoder_rate(mut self) -> Self {
        self.embedding_learning_rate = PRETRAINED_ENCODER_LEARNING_RATE;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.learning_rate) || !positive(self.embedding_learning_rate) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding dimension must be at least 1".into()));
        }
        if self.max_span_width == 0 {
            return Err(Error::Config("maximum span width must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if !(self.negative_sample_rate > 0.0 && self.negative_sample_rate <= 1.0) {
            return Err(Error::Config("negative sample rate must be in (0, 1]".into()));
        }
        if !(self.weight_decay >= 0.0) || !(self.init_scale >= 0.0) {
            return Err(Error::Config("weight decay and init scale must be non-negative".into()));
        }
        Ok(())
    }
}

struct Example {
    ids: Vec<usize>,
    spans: Vec<Span>,
    targets: Vec<Vec<f64>>,
    positive: Vec<bool>,
}

/// Multi-label gold targets: every attribute of every relation sets its
/// `(label, role)` bit on its span. Attributes wider than the span limit
/// cannot be represented and are skipped.
fn gold_targets(doc: &Document, schema: &Schema, spans: &[Span]) -> (Vec<Vec<f64>>, Vec<bool>) {
    let labels = span_label_set(schema);
    let index: HashMap<(&str, &str), usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| ((l.label.as_str(), l.role.as_str()), i))
        .collect();
    let span_index: HashMap<Span, usize> = spans.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut targets = vec![vec![0.0; labels.len()]; spans.len()];
    let mut positive = vec![false; spans.len()];
    for rel in &doc.relations {
        for attr in &rel.attributes {
            let (Some(&t), Some(&s)) = (
                index.get(&(rel.label.as_str(), attr.role.as_str())),
                span_index.get(&attr.span),
            ) else {
                continue;
            };
            targets[s][t] = 1.0;
            positive[s] = true;
        }
    }
    (targets, positive)
}

pub fn train(corpus: &[Document], schema: &Schema, config: &SpanTrainConfig) -> Result<SpanModel> {
    train_with_log(corpus, schema, config, |_, _| {})
}

/// As [`train`], reporting `(epoch, mean training loss)` after every epoch.
pub fn train_with_log(
    corpus: &[Document],
    schema: &Schema,
    config: &SpanTrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<SpanModel> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Config("cannot train on an empty corpus".into()));
    }
    let vocabulary: BTreeSet<&String> = corpus.iter().flat_map(|d| &d.tokens).collect();
    let mut model = SpanModel::zeros(
        span_label_set(schema),
        vocabulary.into_iter().cloned().collect(),
        config.embedding_dim,
        schema.fingerprint(),
        config.clone(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = config.init_scale;
    if scale > 0.0 {
        for group in [&mut model.embeddings, &mut model.attention, &mut model.head] {
            for x in group.iter_mut() {
                *x = rng.random_range(-scale..scale);
            }
        }
    }

    let examples: Vec<Example> = corpus
        .iter()
        .filter(|d| !d.tokens.is_empty())
        .map(|doc| {
            let spans = enumerate_spans(doc.tokens.len(), config.max_span_width);
            let (targets, positive) = gold_targets(doc, schema, &spans);
            Example {
                ids: model.token_ids(&doc.tokens),
                spans,
                targets,
                positive,
            }
        })
        .collect();

    let adam = AdamConfig {
        weight_decay: config.weight_decay,
        ..AdamConfig::default()
    };
    let mut states: Vec<AdamState> = model.parameters_mut().iter().map(|p| AdamState::new(p.len())).collect();
    let rates = [
        config.embedding_learning_rate,
        config.learning_rate,
        config.learning_rate,
        config.learning_rate,
    ];
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut step = 0u64;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = SpanGradient::zeros_like(&model);
            for &i in batch {
                let ex = &examples[i];
                let (loss, g) = if config.negative_sample_rate < 1.0 {
                    let keep: Vec<usize> = (0..ex.spans.len())
                        .filter(|&s| ex.positive[s] || rng.random_bool(config.negative_sample_rate))
                        .collect();
                    let spans: Vec<Span> = keep.iter().map(|&s| ex.spans[s]).collect();
                    let targets: Vec<Vec<f64>> = keep.iter().map(|&s| ex.targets[s].clone()).collect();
                    model.loss_and_gradient(&ex.ids, &spans, &targets)
                } else {
                    model.loss_and_gradient(&ex.ids, &ex.spans, &ex.targets)
                };
                epoch_loss += loss;
                grad.add_scaled(&g, 1.0 / batch.len() as f64);
            }
            step += 1;
            let grads = [grad.embeddings, grad.attention, grad.head, grad.bias];
            for (((params, state), g), lr) in model.parameters_mut().into_iter().zip(&mut states).zip(&grads).zip(rates) {
                state.update(params, g, lr, step, &adam);
            }
        }
        on_epoch(epoch, epoch_loss / examples.len().max(1) as f64);
    }
    Ok(model)
}

/// All `(span, label, role)` triples with probability at least `threshold`,
/// ordered by span then label index.
pub fn predict(model: &SpanModel, schema: &Schema, doc: &Document, threshold: f64) -> Result<Vec<SpanPrediction>> {
    let fp = schema.fingerprint();
    if model.schema_fingerprint != fp {
        return Err(Error::FingerprintMismatch {
            model: model.schema_fingerprint.clone(),
            schema: fp,
        });
    }
    if model.labels != span_label_set(schema) {
        return Err(Error::Config("model label set differs from the schema label set".into()));
    }
    if doc.tokens.is_empty() {
        return Ok(Vec::new());
    }
    let ids = model.token_ids(&doc.tokens);
    let spans = enumerate_spans(ids.len(), model.max_span_width);
    let probs = model.span_probabilities(&ids, &spans);
    let mut out = Vec::new();
    for (span, row) in spans.iter().zip(probs) {
        for (t, p) in row.into_iter().enumerate() {
            if p >= threshold {
                out.push(SpanPrediction {
                    span: *span,
                    label: model.labels[t].label.clone(),
                    role: model.labels[t].role.clone(),
                    probability: p,
                });
            }
        }
    }
    Ok(out)
}

pub fn predict_all(model: &SpanModel, schema: &Schema, corpus: &[Document], threshold: f64) -> Result<Vec<Vec<SpanPrediction>>> {
    corpus.iter().map(|d| predict(model, schema, d, threshold)).collect()
}
