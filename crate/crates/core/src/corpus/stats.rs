use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{Document, Schema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplicitnessEntry {
    pub label: String,
    pub role: String,
    /// Attributes with this role in relations of this label.
    pub attribute_count: usize,
    /// Entities whose type the role accepts.
    pub compatible_entity_count: usize,
    pub ratio: f64,
}

impl ExplicitnessEntry {
    fn new(label: &str, role: &str) -> Self {
        ExplicitnessEntry {
            label: label.to_string(),
            role: role.to_string(),
            attribute_count: 0,
            compatible_entity_count: 0,
            ratio: 0.0,
        }
    }

    fn refresh(&mut self) {
        self.ratio = if self.compatible_entity_count == 0 {
            0.0
        } else {
            // a span may serve the same role in several relations, so the raw
            // quotient can exceed one
            (self.attribute_count as f64 / self.compatible_entity_count as f64).min(1.0)
        };
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusStats {
    pub document_count: usize,
    pub relation_count: usize,
    pub entity_count: usize,
    pub word_count: usize,
    /// label -> attributes-per-relation -> relation count
    pub attribute_count_distribution: BTreeMap<String, BTreeMap<usize, usize>>,
    pub explicitness: Vec<ExplicitnessEntry>,
    pub multi_trigger_relation_count: usize,
}

impl CorpusStats {
    /// Zeroed statistics with one explicitness entry per schema `(label, role)`.
    pub fn empty(schema: &Schema) -> Self {
        CorpusStats {
            explicitness: schema
                .labels
                .iter()
                .flat_map(|l| l.roles.iter().map(|r| ExplicitnessEntry::new(&l.name, &r.name)))
                .collect(),
            ..CorpusStats::default()
        }
    }

    /// Adds one document's counts.
    pub fn add_document(&mut self, doc: &Document, schema: &Schema) {
        self.document_count += 1;
        self.relation_count += doc.relations.len();
        self.entity_count += doc.entities.len();
        self.word_count += doc.tokens.len();
        for rel in &doc.relations {
            *self
                .attribute_count_distribution
                .entry(rel.label.clone())
                .or_default()
                .entry(rel.attributes.len())
                .or_default() += 1;
            if let Some(trigger) = schema.trigger_role(&rel.label) {
                if rel.attributes.iter().filter(|a| a.role == trigger).count() > 1 {
                    self.multi_trigger_relation_count += 1;
                }
            }
        }
        for entry in &mut self.explicitness {
            let types = schema.entity_types(&entry.label, &entry.role);
            entry.compatible_entity_count += doc
                .entities
                .iter()
                .filter(|e| types.contains(&e.entity_type))
                .count();
            entry.attribute_count += doc
                .relations
                .iter()
                .filter(|r| r.label == entry.label)
                .flat_map(|r| &r.attributes)
                .filter(|a| a.role == entry.role)
                .count();
            entry.refresh();
        }
    }

    /// Associative, commutative combination of partial statistics computed
    /// against the same schema.
    pub fn merge(mut self, other: &CorpusStats) -> CorpusStats {
        self.document_count += other.document_count;
        self.relation_count += other.relation_count;
        self.entity_count += other.entity_count;
        self.word_count += other.word_count;
        self.multi_trigger_relation_count += other.multi_trigger_relation_count;
        for (label, hist) in &other.attribute_count_distribution {
            let mine = self.attribute_count_distribution.entry(label.clone()).or_default();
            for (k, v) in hist {
                *mine.entry(*k).or_default() += v;
            }
        }
        for theirs in &other.explicitness {
            match self
                .explicitness
                .iter_mut()
                .find(|e| e.label == theirs.label && e.role == theirs.role)
            {
                Some(e) => {
                    e.attribute_count += theirs.attribute_count;
                    e.compatible_entity_count += theirs.compatible_entity_count;
                    e.refresh();
                }
                None => self.explicitness.push(theirs.clone()),
            }
        }
        self
    }

    pub fn explicitness_of(&self, label: &str, role: &str) -> Option<f64> {
        self.explicitness
            .iter()
            .find(|e| e.label == label && e.role == role)
            .map(|e| e.ratio)
    }
}

pub fn corpus_stats(corpus: &[Document], schema: &Schema) -> CorpusStats {
    let mut stats = CorpusStats::empty(schema);
    for doc in corpus {
        stats.add_document(doc, schema);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Attribute, Entity, LabelDef, Relation, RoleDef, Span};

    fn schema() -> Schema {
        Schema::new(vec![LabelDef::new(
            "Accident",
            vec![
                RoleDef::new("Trigger", true).trigger().with_entity_types(["Trigger"]),
                RoleDef::new("Location", true).with_entity_types(["Location-City", "Location-Street"]),
            ],
        )])
        .unwrap()
    }

    fn doc() -> Document {
        let mut d = Document::new("d", (0..8).map(|i| format!("t{i}")).collect());
        for (s, t) in [(0, "Trigger"), (2, "Location-City"), (4, "Location-Street"), (6, "Trigger")] {
            d.entities.push(Entity {
                span: Span::new(s, s + 1),
                entity_type: t.into(),
            });
        }
        d.relations.push(Relation::new(
            "Accident",
            vec![
                Attribute::new(0, 1, "Trigger"),
                Attribute::new(2, 3, "Location"),
                Attribute::new(6, 7, "Trigger"),
            ],
        ));
        d
    }

    #[test]
    fn counts_and_explicitness() {
        let s = corpus_stats(&[doc()], &schema());
        assert_eq!(s.document_count, 1);
        assert_eq!(s.relation_count, 1);
        assert_eq!(s.entity_count, 4);
        assert_eq!(s.word_count, 8);
        assert_eq!(s.multi_trigger_relation_count, 1);
        assert_eq!(s.attribute_count_distribution["Accident"][&3], 1);
        assert_eq!(s.explicitness_of("Accident", "Location"), Some(0.5));
        assert_eq!(s.explicitness_of("Accident", "Trigger"), Some(1.0));
    }

    #[test]
    fn empty_corpus_is_zeroed() {
        let s = corpus_stats(&[], &schema());
        assert_eq!(s.document_count + s.relation_count + s.entity_count + s.word_count, 0);
        assert_eq!(s.explicitness.len(), 2);
        assert!(s.explicitness.iter().all(|e| e.ratio == 0.0));
    }

    #[test]
    fn merge_matches_concatenation() {
        let a = vec![doc()];
        let mut second = doc();
        second.relations.clear();
        let b = vec![second, doc()];
        let whole: Vec<Document> = a.iter().chain(&b).cloned().collect();
        let merged = corpus_stats(&a, &schema()).merge(&corpus_stats(&b, &schema()));
        assert_eq!(merged, corpus_stats(&whole, &schema()));
    }
}
