use fnv::FnvHashMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::dp::marginals;
use super::features::FeatureVector;
use super::potentials::Potentials;
use super::train::TrainConfig;
use crate::error::{Error, Result};

/// Emission weights `[hash space x tags]`, stored by materialised rows.
/// A row that was never written is all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "EmissionRows", from = "EmissionRows")]
pub struct EmissionTable {
    k: usize,
    index: FnvHashMap<u32, usize>,
    ids: Vec<u32>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EmissionRows {
    tags: usize,
    rows: Vec<(u32, Vec<f64>)>,
}

impl From<EmissionTable> for EmissionRows {
    fn from(t: EmissionTable) -> Self {
        let mut rows: Vec<(u32, Vec<f64>)> = t
            .ids
            .iter()
            .enumerate()
            .map(|(r, &id)| (id, t.weights[r * t.k..(r + 1) * t.k].to_vec()))
            .collect();
        rows.sort_by_key(|(id, _)| *id);
        EmissionRows { tags: t.k, rows }
    }
}

impl From<EmissionRows> for EmissionTable {
    fn from(rows: EmissionRows) -> Self {
        let mut t = EmissionTable::new(rows.tags);
        for (id, w) in rows.rows {
            t.row_mut(id).copy_from_slice(&w[..rows.tags.min(w.len())]);
        }
        t
    }
}

impl EmissionTable {
    pub fn new(k: usize) -> Self {
        EmissionTable {
            k,
            index: FnvHashMap::default(),
            ids: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn num_tags(&self) -> usize {
        self.k
    }

    /// Number of materialised rows.
    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn row(&self, id: u32) -> Option<&[f64]> {
        self.index.get(&id).map(|&r| &self.weights[r * self.k..(r + 1) * self.k])
    }

    pub fn get(&self, id: u32, tag: usize) -> f64 {
        self.row(id).map_or(0.0, |r| r[tag])
    }

    /// Mutable row, materialising it (zeroed) on first access.
    pub fn row_mut(&mut self, id: u32) -> &mut [f64] {
        let k = self.k;
        let r = match self.index.get(&id) {
            Some(&r) => r,
            None => {
                let r = self.ids.len();
                self.index.insert(id, r);
                self.ids.push(id);
                self.weights.resize(self.weights.len() + k, 0.0);
                r
            }
        };
        &mut self.weights[r * k..(r + 1) * k]
    }

    pub(crate) fn row_slot(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }
}

/// Gradient of the negative log-likelihood with respect to all weight groups.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfGradient {
    pub k: usize,
    /// Sparse emission rows keyed by feature id.
    pub emission: BTreeMap<u32, Vec<f64>>,
    pub transitions: Vec<f64>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl CrfGradient {
    pub fn zeros(k: usize) -> Self {
        CrfGradient {
            k,
            emission: BTreeMap::new(),
            transitions: vec![0.0; k * k],
            start: vec![0.0; k],
            end: vec![0.0; k],
        }
    }

    pub fn add_scaled(&mut self, other: &CrfGradient, scale: f64) {
        for (id, row) in &other.emission {
            let mine = self.emission.entry(*id).or_insert_with(|| vec![0.0; self.k]);
            for (a, b) in mine.iter_mut().zip(row) {
                *a += scale * b;
            }
        }
        for (a, b) in self.transitions.iter_mut().zip(&other.transitions) {
            *a += scale * b;
        }
        for (a, b) in self.start.iter_mut().zip(&other.start) {
            *a += scale * b;
        }
        for (a, b) in self.end.iter_mut().zip(&other.end) {
            *a += scale * b;
        }
    }

    pub fn norm(&self) -> f64 {
        self.emission
            .values()
            .flatten()
            .chain(&self.transitions)
            .chain(&self.start)
            .chain(&self.end)
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

/// Trained CRF tagger. Self-describing: it carries the rendered tag set and
/// the fingerprint of the schema it was trained against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CrfModel {
    pub schema_fingerprint: String,
    pub tags: Vec<String>,
    pub hash_bits: u32,
    pub emission: EmissionTable,
    pub transitions: Vec<f64>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub config: TrainConfig,
}

impl CrfModel {
    pub fn zeros(tags: Vec<String>, schema_fingerprint: String, config: TrainConfig) -> Self {
        let k = tags.len();
        CrfModel {
            schema_fingerprint,
            tags,
            hash_bits: super::HASH_BITS,
            emission: EmissionTable::new(k),
            transitions: vec![0.0; k * k],
            start: vec![0.0; k],
            end: vec![0.0; k],
            config,
        }
    }

    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    fn check_dimensions(&self) -> Result<()> {
        let k = self.num_tags();
        if k == 0
            || self.emission.num_tags() != k
            || self.transitions.len() != k * k
            || self.start.len() != k
            || self.end.len() != k
        {
            return Err(Error::Config(format!(
                "CRF weight dimensions do not match the {k}-tag set"
            )));
        }
        Ok(())
    }

    /// Emission, transition and boundary scores for one token sequence;
    /// `emission[t][k]` is the sum of the weights of the active features.
    pub fn score_potentials(&self, features: &[FeatureVector]) -> Result<Potentials> {
        self.check_dimensions()?;
        let k = self.num_tags();
        let mut p = Potentials::zeros(features.len(), k);
        for (t, fv) in features.iter().enumerate() {
            let row = &mut p.emissions[t * k..(t + 1) * k];
            for &id in fv.ids() {
                if let Some(w) = self.emission.row(id) {
                    for (e, x) in row.iter_mut().zip(w) {
                        *e += x;
                    }
                }
            }
        }
        p.transitions.copy_from_slice(&self.transitions);
        p.start.copy_from_slice(&self.start);
        p.end.copy_from_slice(&self.end);
        Ok(p)
    }
}

/// Negative log-likelihood of the gold path and its gradient (expected
/// minus observed feature counts).
pub fn nll_and_gradient(
    model: &CrfModel,
    features: &[FeatureVector],
    gold: &[usize],
) -> Result<(f64, CrfGradient)> {
    if features.is_empty() || features.len() != gold.len() {
        return Err(Error::Config(format!(
            "{} feature vectors for {} gold tags",
            features.len(),
            gold.len()
        )));
    }
    let k = model.num_tags();
    if let Some(&bad) = gold.iter().find(|&&g| g >= k) {
        return Err(Error::Config(format!("gold tag {bad} outside the {k}-tag set")));
    }
    let p = model.score_potentials(features)?;
    let m = marginals(&p);
    let loss = m.log_partition - p.path_score(gold);

    let n = features.len();
    let mut grad = CrfGradient::zeros(k);
    for (t, fv) in features.iter().enumerate() {
        let mut delta = m.unary_at(t, k).to_vec();
        delta[gold[t]] -= 1.0;
        for &id in fv.ids() {
            let row = grad.emission.entry(id).or_insert_with(|| vec![0.0; k]);
            for (g, d) in row.iter_mut().zip(&delta) {
                *g += d;
            }
        }
    }
    for t in 0..n - 1 {
        for (g, pm) in grad.transitions.iter_mut().zip(&m.pairwise[t * k * k..(t + 1) * k * k]) {
            *g += pm;
        }
        grad.transitions[gold[t] * k + gold[t + 1]] -= 1.0;
    }
    grad.start.copy_from_slice(m.unary_at(0, k));
    grad.start[gold[0]] -= 1.0;
    grad.end.copy_from_slice(m.unary_at(n - 1, k));
    grad.end[gold[n - 1]] -= 1.0;
    Ok((loss, grad))
}
