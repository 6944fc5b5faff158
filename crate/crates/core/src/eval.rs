//! Relation-level scoring under five strategies: attribute recognition
//! (AR), classification (Cl), mandatory relation extraction (MRE), complete
//! relation extraction (CRE) and MRE restricted to binary documents (BRE).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_binary_document, Attribute, BinarySubsetOptions, Document, Relation, Schema, Span};
use crate::error::{Error, Result};

/// Relations keyed by document id.
pub type RelationsByDoc = BTreeMap<String, Vec<Relation>>;

pub fn relations_by_doc(corpus: &[Document]) -> RelationsByDoc {
    corpus.iter().map(|d| (d.id.clone(), d.relations.clone())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "AR")]
    Ar,
    #[serde(rename = "Cl")]
    Cl,
    #[serde(rename = "MRE")]
    Mre,
    #[serde(rename = "CRE")]
    Cre,
    #[serde(rename = "BRE")]
    Bre,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::Ar, Strategy::Cl, Strategy::Mre, Strategy::Cre, Strategy::Bre];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Ar => "AR",
            Strategy::Cl => "Cl",
            Strategy::Mre => "MRE",
            Strategy::Cre => "CRE",
            Strategy::Bre => "BRE",
        }
    }

    /// Parses a comma-separated list such as `ar,mre`; the result follows the
    /// fixed AR, Cl, MRE, CRE, BRE order without duplicates.
    pub fn parse_list(text: &str) -> Result<Vec<Strategy>> {
        let set: BTreeSet<Strategy> = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if set.is_empty() {
            return Err(Error::Config("no evaluation strategy given".into()));
        }
        Ok(set.into_iter().collect())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}` (expected ar, cl, mre, cre or bre)")))
    }
}

/// Micro-aggregated counts with derived precision, recall and F1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.true_positives += other.true_positives;
        self.predicted += other.predicted;
        self.gold += other.gold;
    }

    pub fn prf(self) -> Prf {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.true_positives, self.predicted);
        let recall = ratio(self.true_positives, self.gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            true_positives: self.true_positives,
            predicted_count: self.predicted,
            gold_count: self.gold,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Prf {
    pub true_positives: usize,
    pub predicted_count: usize,
    pub gold_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn rounded(self) -> Prf {
        let r = |x: f64| (x * 1e4).round() / 1e4;
        Prf {
            precision: r(self.precision),
            recall: r(self.recall),
            f1: r(self.f1),
            ..self
        }
    }
}

fn doc_ids<'a>(pred: &'a RelationsByDoc, gold: &'a RelationsByDoc) -> BTreeSet<&'a String> {
    pred.keys().chain(gold.keys()).collect()
}

const EMPTY: &[Relation] = &[];

fn doc_relations<'a>(map: &'a RelationsByDoc, id: &str) -> &'a [Relation] {
    map.get(id).map_or(EMPTY, Vec::as_slice)
}

type Triple = (Span, String, String);

fn triples(relations: &[Relation]) -> BTreeSet<Triple> {
    relations
        .iter()
        .flat_map(|r| r.attributes.iter().map(move |a| (a.span, r.label.clone(), a.role.clone())))
        .collect()
}

fn ar_counts(pred: &[Relation], gold: &[Relation]) -> Counts {
    let p = triples(pred);
    let g = triples(gold);
    Counts {
        true_positives: p.intersection(&g).count(),
        predicted: p.len(),
        gold: g.len(),
    }
}

/// Attribute recognition: per-document sets of `(span, label, role)`.
pub fn score_ar(pred: &RelationsByDoc, gold: &RelationsByDoc) -> Prf {
    let mut c = Counts::default();
    for id in doc_ids(pred, gold) {
        c.add(ar_counts(doc_relations(pred, id), doc_relations(gold, id)));
    }
    c.prf()
}

fn sorted_attributes(rel: &Relation) -> Vec<Attribute> {
    let mut a = rel.attributes.clone();
    a.sort();
    a
}

fn mandatory_set(rel: &Relation, schema: &Schema) -> BTreeSet<Attribute> {
    rel.attributes
        .iter()
        .filter(|a| schema.is_mandatory(&rel.label, &a.role))
        .cloned()
        .collect()
}

fn full_set(rel: &Relation) -> BTreeSet<Attribute> {
    rel.attributes.iter().cloned().collect()
}

/// Whether `pred` matches `gold` under a relation-level strategy. AR has
/// no relation-level criterion; BRE uses the MRE criterion.
pub fn relation_matches(strategy: Strategy, pred: &Relation, gold: &Relation, schema: &Schema) -> bool {
    if pred.label != gold.label {
        return false;
    }
    match strategy {
        Strategy::Cl => true,
        Strategy::Mre | Strategy::Bre => mandatory_set(pred, schema) == mandatory_set(gold, schema),
        Strategy::Cre => full_set(pred) == full_set(gold),
        Strategy::Ar => false,
    }
}

/// Greedy one-to-one matching: predictions in `(label, attributes)` order
/// each take the first unmatched gold relation (same order) satisfying the
/// criterion. Returns matched `(pred, gold)` index pairs.
pub fn match_relations(
    strategy: Strategy,
    pred: &[Relation],
    gold: &[Relation],
    schema: &Schema,
) -> Vec<(usize, usize)> {
    let order = |rels: &[Relation]| {
        let mut idx: Vec<usize> = (0..rels.len()).collect();
        idx.sort_by_cached_key(|&i| (rels[i].label.clone(), sorted_attributes(&rels[i])));
        idx
    };
    let gold_order = order(gold);
    let mut used = vec![false; gold.len()];
    let mut pairs = Vec::new();
    for pi in order(pred) {
        if let Some(&gi) = gold_order
            .iter()
            .find(|&&gi| !used[gi] && relation_matches(strategy, &pred[pi], &gold[gi], schema))
        {
            used[gi] = true;
            pairs.push((pi, gi));
        }
    }
    pairs
}

fn relation_counts(strategy: Strategy, pred: &[Relation], gold: &[Relation], schema: &Schema) -> Counts {
    Counts {
        true_positives: match_relations(strategy, pred, gold, schema).len(),
        predicted: pred.len(),
        gold: gold.len(),
    }
}

fn score_relations(strategy: Strategy, pred: &RelationsByDoc, gold: &RelationsByDoc, schema: &Schema) -> Prf {
    let mut c = Counts::default();
    for id in doc_ids(pred, gold) {
        c.add(relation_counts(strategy, doc_relations(pred, id), doc_relations(gold, id), schema));
    }
    c.prf()
}

pub fn score_cl(pred: &RelationsByDoc, gold: &RelationsByDoc, schema: &Schema) -> Prf {
    score_relations(Strategy::Cl, pred, gold, schema)
}

pub fn score_mre(pred: &RelationsByDoc, gold: &RelationsByDoc, schema: &Schema) -> Prf {
    score_relations(Strategy::Mre, pred, gold, schema)
}

pub fn score_cre(pred: &RelationsByDoc, gold: &RelationsByDoc, schema: &Schema) -> Prf {
    score_relations(Strategy::Cre, pred, gold, schema)
}

/// Ids of gold documents in the binary subset.
pub fn binary_doc_ids(gold: &RelationsByDoc, schema: &Schema) -> BTreeSet<String> {
    gold.iter()
        .filter(|(id, rels)| {
            let mut doc = Document::new(id.as_str(), Vec::new());
            doc.relations = (*rels).clone();
            is_binary_document(&doc, schema, BinarySubsetOptions::default())
        })
        .map(|(id, _)| id.clone())
        .collect()
}

fn restrict(map: &RelationsByDoc, ids: &BTreeSet<String>) -> RelationsByDoc {
    map.iter()
        .filter(|(id, _)| ids.contains(*id))
        .map(|(id, r)| (id.clone(), r.clone()))
        .collect()
}

/// MRE on the documents whose gold relations are all binary.
pub fn score_bre(pred: &RelationsByDoc, gold: &RelationsByDoc, schema: &Schema) -> Prf {
    let ids = binary_doc_ids(gold, schema);
    score_mre(&restrict(pred, &ids), &restrict(gold, &ids), schema)
}

/// Removes trigger-role attributes; relations left empty are dropped.
pub fn strip_triggers(map: &RelationsByDoc, schema: &Schema) -> RelationsByDoc {
    map.iter()
        .map(|(id, rels)| {
            let kept = rels
                .iter()
                .filter_map(|r| {
                    let trigger = schema.trigger_role(&r.label);
                    let attributes: Vec<Attribute> = r
                        .attributes
                        .iter()
                        .filter(|a| Some(a.role.as_str()) != trigger)
                        .cloned()
                        .collect();
                    (!attributes.is_empty()).then(|| Relation::new(r.label.clone(), attributes))
                })
                .collect();
            (id.clone(), kept)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalConfig {
    pub strategies: Vec<Strategy>,
    pub exclude_triggers: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            strategies: Strategy::ALL.to_vec(),
            exclude_triggers: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StrategyScore {
    pub strategy: Strategy,
    #[serde(flatten)]
    pub prf: Prf,
    /// Scores restricted to each relation label.
    pub per_label: BTreeMap<String, Prf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub config: EvalConfig,
    pub scores: Vec<StrategyScore>,
    /// Doc ids present in only one of prediction and gold.
    pub unmatched_doc_ids: Vec<String>,
}

impl MetricsReport {
    pub fn get(&self, strategy: Strategy) -> Option<&Prf> {
        self.scores.iter().find(|s| s.strategy == strategy).map(|s| &s.prf)
    }

    /// Precision, recall and F1 at full precision are kept; the JSON form
    /// carries them rounded to four decimals.
    pub fn to_json(&self) -> String {
        let rounded = MetricsReport {
            scores: self
                .scores
                .iter()
                .map(|s| StrategyScore {
                    strategy: s.strategy,
                    prf: s.prf.rounded(),
                    per_label: s.per_label.iter().map(|(l, p)| (l.clone(), p.rounded())).collect(),
                })
                .collect(),
            ..self.clone()
        };
        serde_json::to_string_pretty(&rounded).expect("report serialization cannot fail")
    }

    /// Model rows `F1`, `P`, `R` against one column per strategy.
    pub fn table(&self, model: &str) -> String {
        let width = model.chars().count().max(5);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}  {:<2}", "Model", "");
        for s in &self.scores {
            let _ = write!(out, " | {:>6}", s.strategy.name());
        }
        out.push('\n');
        let rule = width + 4 + 9 * self.scores.len();
        out.push_str(&"-".repeat(rule));
        out.push('\n');
        let rows: [(&str, fn(&Prf) -> f64); 3] = [("F1", |p| p.f1), ("P", |p| p.precision), ("R", |p| p.recall)];
        for (i, (name, get)) in rows.iter().enumerate() {
            let first = if i == 0 { model } else { "" };
            let _ = write!(out, "{first:<width$}  {name:<2}");
            for s in &self.scores {
                let _ = write!(out, " | {:>6.4}", get(&s.prf));
            }
            out.push('\n');
        }
        out
    }
}

fn by_label(map: &RelationsByDoc, label: &str) -> RelationsByDoc {
    map.iter()
        .map(|(id, rels)| (id.clone(), rels.iter().filter(|r| r.label == label).cloned().collect()))
        .collect()
}

pub fn score(strategy: Strategy, pred: &RelationsByDoc, gold: &RelationsByDoc, schema: &Schema) -> Prf {
    match strategy {
        Strategy::Ar => score_ar(pred, gold),
        Strategy::Cl => score_cl(pred, gold, schema),
        Strategy::Mre => score_mre(pred, gold, schema),
        Strategy::Cre => score_cre(pred, gold, schema),
        Strategy::Bre => score_bre(pred, gold, schema),
    }
}

/// Runs the configured strategies. The binary subset is always determined
/// on the gold relations as given, before trigger removal.
pub fn evaluate(pred: &RelationsByDoc, gold: &RelationsByDoc, schema: &Schema, config: &EvalConfig) -> MetricsReport {
    let binary = binary_doc_ids(gold, schema);
    let (pred, gold) = if config.exclude_triggers {
        (strip_triggers(pred, schema), strip_triggers(gold, schema))
    } else {
        (pred.clone(), gold.clone())
    };
    let mut strategies: Vec<Strategy> = config.strategies.clone();
    strategies.sort();
    strategies.dedup();
    let labels: BTreeSet<&String> = pred.values().chain(gold.values()).flatten().map(|r| &r.label).collect();
    let scores = strategies
        .iter()
        .map(|&strategy| {
            let (p, g) = if strategy == Strategy::Bre {
                (restrict(&pred, &binary), restrict(&gold, &binary))
            } else {
                (pred.clone(), gold.clone())
            };
            let plain = if strategy == Strategy::Bre { Strategy::Mre } else { strategy };
            StrategyScore {
                strategy,
                prf: score(plain, &p, &g, schema),
                per_label: labels
                    .iter()
                    .map(|l| ((*l).clone(), score(plain, &by_label(&p, l), &by_label(&g, l), schema)))
                    .collect(),
            }
        })
        .collect();
    let unmatched_doc_ids = pred
        .keys()
        .filter(|k| !gold.contains_key(*k))
        .chain(gold.keys().filter(|k| !pred.contains_key(*k)))
        .cloned()
        .collect();
    MetricsReport {
        config: EvalConfig {
            strategies,
            exclude_triggers: config.exclude_triggers,
        },
        scores,
        unmatched_doc_ids,
    }
}
