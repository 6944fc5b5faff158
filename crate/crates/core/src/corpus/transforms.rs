//! Corpus transforms used to adapt MARE data to trigger-based and
//! binary-relation formulations.

use serde::Serialize;

use super::{Document, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum UnresolvedReason {
    /// The schema designates no trigger role for the label.
    NoTriggerRole,
    /// The relation has no attribute with the designated trigger role.
    MissingTriggerAttribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnresolvedTrigger {
    pub relation: usize,
    pub label: String,
    pub reason: UnresolvedReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerAssignment {
    pub document: Document,
    /// Relations left untouched because no trigger could be designated.
    pub unresolved: Vec<UnresolvedTrigger>,
    /// Relations that carried several trigger attributes and were reduced to one.
    pub multi_trigger_resolved: usize,
}

/// Reduces every relation to exactly one trigger attribute: the trigger-role
/// attribute with the smallest start (then smallest end). Surplus trigger
/// attributes are dropped. The input document is not modified.
pub fn assign_triggers(doc: &Document, schema: &Schema) -> TriggerAssignment {
    let mut out = doc.clone();
    let mut unresolved = Vec::new();
    let mut multi = 0;
    for (ri, rel) in out.relations.iter_mut().enumerate() {
        let Some(trigger) = schema.trigger_role(&rel.label) else {
            unresolved.push(UnresolvedTrigger {
                relation: ri,
                label: rel.label.clone(),
                reason: UnresolvedReason::NoTriggerRole,
            });
            continue;
        };
        let first = rel
            .attributes
            .iter()
            .filter(|a| a.role == trigger)
            .map(|a| a.span)
            .min();
        let Some(first) = first else {
            unresolved.push(UnresolvedTrigger {
                relation: ri,
                label: rel.label.clone(),
                reason: UnresolvedReason::MissingTriggerAttribute,
            });
            continue;
        };
        let before = rel.attributes.len();
        rel.attributes.retain(|a| a.role != trigger || a.span == first);
        if rel.attributes.len() != before {
            multi += 1;
        }
    }
    TriggerAssignment {
        document: out,
        unresolved,
        multi_trigger_resolved: multi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinarySubsetOptions {
    /// Keep documents without any relation (vacuously binary).
    pub keep_relation_free: bool,
}

impl Default for BinarySubsetOptions {
    fn default() -> Self {
        // The published train subset (1,717 of 1,864 documents) exceeds the
        // number of train documents that carry relations at all, so
        // relation-free documents must be part of it.
        BinarySubsetOptions {
            keep_relation_free: true,
        }
    }
}

/// True if every relation has exactly two attributes with mandatory roles.
pub fn is_binary_document(doc: &Document, schema: &Schema, options: BinarySubsetOptions) -> bool {
    if doc.relations.is_empty() {
        return options.keep_relation_free;
    }
    doc.relations.iter().all(|rel| {
        rel.attributes
            .iter()
            .filter(|a| schema.is_mandatory(&rel.label, &a.role))
            .count()
            == 2
    })
}

pub fn binary_subset_with(
    corpus: &[Document],
    schema: &Schema,
    options: BinarySubsetOptions,
) -> Vec<Document> {
    corpus
        .iter()
        .filter(|d| is_binary_document(d, schema, options))
        .cloned()
        .collect()
}

/// Documents whose relations all have exactly two mandatory attributes.
pub fn binary_subset(corpus: &[Document], schema: &Schema) -> Vec<Document> {
    binary_subset_with(corpus, schema, BinarySubsetOptions::default())
}
