use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dp::viterbi;
use super::features::{extract_all, FeatureVector};
use super::model::{nll_and_gradient, CrfGradient, CrfModel};
use crate::corpus::{Document, Schema};
use crate::error::{Error, Result};
use crate::optim::{AdamConfig, AdamState};
use crate::tagscheme::{encode, TagSequence, TagSet};

/// Learning rate used for every non-embedder component.
pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;
/// Batch size used for both extraction approaches.
pub const DEFAULT_BATCH_SIZE: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: DEFAULT_LEARNING_RATE,
            weight_decay: AdamConfig::default().weight_decay,
            batch_size: DEFAULT_BATCH_SIZE,
            epochs: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config("weight decay must be non-negative".into()));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            weight_decay: self.weight_decay,
            ..AdamConfig::default()
        }
    }
}

struct Example {
    features: Vec<FeatureVector>,
    gold: Vec<usize>,
}

/// Trains a CRF tagger on the tag encoding of `corpus`.
pub fn train(corpus: &[Document], schema: &Schema, config: &TrainConfig) -> Result<CrfModel> {
    train_with_log(corpus, schema, config, |_, _| {})
}

/// As [`train`], reporting `(epoch, mean training loss)` after every epoch.
pub fn train_with_log(
    corpus: &[Document],
    schema: &Schema,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<CrfModel> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Config("cannot train on an empty corpus".into()));
    }
    let set = TagSet::new(schema);
    let examples: Vec<Example> = corpus
        .iter()
        .map(|doc| {
            let (tags, _) = encode(doc, schema);
            Example {
                features: extract_all(&doc.tokens),
                gold: tags.indices(&set),
            }
        })
        .collect();

    let mut model = CrfModel::zeros(set.render_all(schema), schema.fingerprint(), config.clone());
    let k = model.num_tags();
    let adam = config.adam();
    let mut emission_state = AdamState::new(0);
    let mut transition_state = AdamState::new(k * k);
    let mut start_state = AdamState::new(k);
    let mut end_state = AdamState::new(k);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut step = 0u64;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut grad = CrfGradient::zeros(k);
            for &i in batch {
                let ex = &examples[i];
                let (loss, g) = nll_and_gradient(&model, &ex.features, &ex.gold)?;
                epoch_loss += loss;
                grad.add_scaled(&g, scale);
            }
            step += 1;

            // Rows seen for the first time join the optimiser with zero
            // weights and moments; every materialised row is updated so the
            // result equals a dense update over the whole hash space.
            for id in grad.emission.keys() {
                model.emission.row_mut(*id);
            }
            let mut dense = vec![0.0; model.emission.rows() * k];
            for (id, row) in &grad.emission {
                let slot = model.emission.row_slot(*id).expect("row materialised above");
                dense[slot * k..(slot + 1) * k].copy_from_slice(row);
            }
            let lr = config.learning_rate;
            emission_state.update(model.emission.weights_mut(), &dense, lr, step, &adam);
            transition_state.update(&mut model.transitions, &grad.transitions, lr, step, &adam);
            start_state.update(&mut model.start, &grad.start, lr, step, &adam);
            end_state.update(&mut model.end, &grad.end, lr, step, &adam);
        }
        on_epoch(epoch, epoch_loss / examples.len() as f64);
    }
    Ok(model)
}

fn check_compatible(model: &CrfModel, schema: &Schema) -> Result<TagSet> {
    let fp = schema.fingerprint();
    if model.schema_fingerprint != fp {
        return Err(Error::FingerprintMismatch {
            model: model.schema_fingerprint.clone(),
            schema: fp,
        });
    }
    let set = TagSet::new(schema);
    if set.render_all(schema) != model.tags {
        return Err(Error::Config("model tag set differs from the schema tag set".into()));
    }
    Ok(set)
}

/// Viterbi tag sequence for one document.
pub fn predict(model: &CrfModel, schema: &Schema, doc: &Document) -> Result<TagSequence> {
    let set = check_compatible(model, schema)?;
    if doc.tokens.is_empty() {
        return Err(Error::Validation {
            doc_id: doc.id.clone(),
            message: "document has no tokens".into(),
        });
    }
    let potentials = model.score_potentials(&extract_all(&doc.tokens))?;
    let (path, _) = viterbi(&potentials);
    Ok(TagSequence::from_indices(&path, &set))
}
